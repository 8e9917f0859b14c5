//! `credcheck` command-line front-end.
//!
//! Exit codes: 0 ok, 2 input error, 3 degenerate corpus, 4 model error.
//! Every failure prints one `error[<Code>]: <message>` line on stderr.

mod args;
mod commands;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let shared = &cli.shared;
    let result = match &cli.command {
        Command::Clean { input, output } => commands::clean(shared, input, output),
        Command::Split {
            input,
            train_out,
            test_out,
        } => commands::split(shared, input, train_out, test_out),
        Command::Train {
            input,
            model,
            train_out,
            test_out,
        } => commands::train(shared, input, model, train_out.as_deref(), test_out.as_deref()),
        Command::Evaluate {
            model,
            input,
            reference,
        } => commands::evaluate(shared, model, input, *reference),
        Command::Predict {
            model,
            input,
            text,
            output,
        } => commands::predict(shared, model, input.as_deref(), text.as_deref(), output.as_deref()),
    };
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code);
    }
}
