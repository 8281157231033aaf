pub mod batch;
pub mod server;

/// Environment variable holding the log filter, e.g. `info` or `chartforce_cli=debug`.
pub const LOG_ENV: &str = "CHARTFORCE_LOG";
