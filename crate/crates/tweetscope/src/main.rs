use clap::Parser;
use tweetscope::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(cli) {
        Ok(serde_json::Value::Null) => {}
        Ok(v) => println!("{v}"),
        Err(e) => {
            let err = serde_json::json!({ "error": { "command": command, "message": format!("{e:#}") } });
            eprintln!("{err}");
            std::process::exit(1);
        }
    }
}
