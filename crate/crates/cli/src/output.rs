use std::io::IsTerminal;

use codec_core::ErrorKind;

use crate::UsageError;

/// Terminal styling, set by `CODEC_COLOR=always|never|auto` (default auto).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMode {
    Always,
    Never,
    Auto,
}

impl ColorMode {
    pub fn from_env() -> Self {
        match std::env::var("CODEC_COLOR").as_deref() {
            Ok("always") => ColorMode::Always,
            Ok("never") => ColorMode::Never,
            _ => ColorMode::Auto,
        }
    }

    pub fn clap(self) -> clap::ColorChoice {
        match self {
            ColorMode::Always => clap::ColorChoice::Always,
            ColorMode::Never => clap::ColorChoice::Never,
            ColorMode::Auto => clap::ColorChoice::Auto,
        }
    }

    pub fn stdout_enabled(self) -> bool {
        match self {
            ColorMode::Always => true,
            ColorMode::Never => false,
            ColorMode::Auto => std::io::stdout().is_terminal(),
        }
    }

    pub fn bold(self, s: &str) -> String {
        if self.stdout_enabled() {
            format!("\x1b[1m{s}\x1b[0m")
        } else {
            s.to_owned()
        }
    }
}

fn kind_of(e: &anyhow::Error) -> ErrorKind {
    for cause in e.chain() {
        if let Some(c) = cause.downcast_ref::<codec_core::Error>() {
            return c.kind();
        }
        if cause.is::<UsageError>() {
            return ErrorKind::Usage;
        }
    }
    ErrorKind::Data
}

fn kind_name(k: ErrorKind) -> &'static str {
    match k {
        ErrorKind::Usage => "usage",
        ErrorKind::Data => "data",
        ErrorKind::Numeric => "numeric",
    }
}

fn code(k: ErrorKind) -> i32 {
    match k {
        ErrorKind::Usage => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numeric => 4,
    }
}

/// 2 usage, 3 data or format, 4 numeric failure.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    code(kind_of(e))
}

fn line(kind: ErrorKind, message: &str) -> String {
    let flat = message.split_whitespace().collect::<Vec<_>>().join(" ");
    serde_json::json!({ "error": { "kind": kind_name(kind), "code": code(kind), "message": flat } }).to_string()
}

/// `{"error":{"kind":..,"code":..,"message":..}}` on a single line.
pub fn error_line(e: &anyhow::Error) -> String {
    line(kind_of(e), &format!("{e:#}"))
}

pub(crate) fn report_clap(e: clap::Error) -> i32 {
    use clap::error::ErrorKind as K;
    match e.kind() {
        K::DisplayHelp | K::DisplayVersion => {
            let _ = e.print();
            0
        }
        K::DisplayHelpOnMissingArgumentOrSubcommand => {
            eprintln!("{}", line(ErrorKind::Usage, "missing subcommand; see `codec --help`"));
            2
        }
        _ => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("{}", line(ErrorKind::Usage, msg));
            2
        }
    }
}
