use crate::sym::SymError;

fn at_line(line: &Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("undeclared symbol `{name}`{}", at_line(.line))]
    UndeclaredSymbol { name: String, line: Option<usize> },
    #[error("symbol `{0}` declared more than once")]
    DuplicateSymbol(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model is not affine in its inputs: {0}")]
    NotAffine(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("every evaluation point was singular; retry with another seed")]
    DegenerateEvaluation,
    #[error(transparent)]
    Sym(#[from] SymError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
