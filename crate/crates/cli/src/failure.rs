use rulelens_client::ClientError;
use rulelens_core::Error;

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_SCHEMA: u8 = 4;
pub const EXIT_PARSE: u8 = 5;

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Client(ClientError),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        Failure::Client(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(Error::Io { .. }) => EXIT_IO,
            Failure::Core(Error::Schema(_)) => EXIT_SCHEMA,
            Failure::Core(Error::Json { .. } | Error::Csv { .. } | Error::Parse { .. }) => EXIT_PARSE,
            Failure::Core(_) => EXIT_OTHER,
            Failure::Client(ClientError::Transport(_)) => EXIT_IO,
            Failure::Client(_) => EXIT_OTHER,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Client(e) => write!(f, "{e}"),
            Failure::Usage(msg) => f.write_str(msg),
        }
    }
}

pub type CliResult<T = ()> = std::result::Result<T, Failure>;
