use std::fmt;

use serde::Serialize;

/// Failure classes, each mapped to its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, grammar strings or config files. Exit 2.
    Parse {
        message: String,
        position: Option<usize>,
    },
    /// Inputs outside a model's domain. Exit 3.
    Domain(String),
    /// An oracle check did not pass. Exit 4.
    Validation(String),
    /// Anything else, e.g. an unwritable output path. Exit 1.
    Io(String),
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        CliError::Parse {
            message: message.into(),
            position: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Domain(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Domain(_) => "domain",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse { message, .. } => message,
            CliError::Domain(m) | CliError::Validation(m) | CliError::Io(m) => m,
        }
    }

    /// One-line JSON record written to stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            exit_code: i32,
            message: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            position: Option<usize>,
        }
        let position = match self {
            CliError::Parse { position, .. } => *position,
            _ => None,
        };
        serde_json::to_string(&Record {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.message(),
            position,
        })
        .expect("error record serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

impl From<leakwise::Error> for CliError {
    fn from(e: leakwise::Error) -> Self {
        match e {
            leakwise::Error::Parse { position, message } => CliError::Parse {
                message,
                position: Some(position),
            },
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Attaches the offending argument to a grammar error so positions make sense.
pub fn in_arg<'a>(flag: &str, value: &'a str) -> impl Fn(leakwise::Error) -> CliError + 'a {
    let flag = flag.to_owned();
    move |e| match CliError::from(e) {
        CliError::Parse { message, position } => CliError::Parse {
            message: format!("{flag} `{value}`: {message}"),
            position,
        },
        other => other,
    }
}
