use std::fmt;

/// Failure caused by the input (bad file, failed validation, bad flag)
/// rather than by the tool. Exits with status 2.
#[derive(Debug)]
pub struct Invalid(pub anyhow::Error);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&describe(&self.0))
    }
}

/// The error and its causes joined with `: `, skipping a cause whose text
/// the previous message already includes.
pub fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !last.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
        last = msg;
    }
    out
}

impl std::error::Error for Invalid {}

pub trait OrInvalid<T> {
    fn or_invalid(self) -> anyhow::Result<T>;
    fn or_invalid_with(self, what: impl FnOnce() -> String) -> anyhow::Result<T>;
}

impl<T, E: Into<anyhow::Error>> OrInvalid<T> for Result<T, E> {
    fn or_invalid(self) -> anyhow::Result<T> {
        self.map_err(|e| Invalid(e.into()).into())
    }

    fn or_invalid_with(self, what: impl FnOnce() -> String) -> anyhow::Result<T> {
        self.map_err(|e| Invalid(e.into().context(what())).into())
    }
}

pub fn invalid(msg: impl fmt::Display) -> anyhow::Error {
    Invalid(anyhow::anyhow!("{msg}")).into()
}
