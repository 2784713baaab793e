use copydesc_augment::AugError;
use copydesc_core::error::Category;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// A command failure tagged with the module that raised it and the
/// process exit code it maps to.
#[derive(Debug, thiserror::Error)]
#[error("[{module}] {message}")]
pub struct Failure {
    pub module: &'static str,
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(module: &'static str, code: i32, message: impl Into<String>) -> Self {
        Self { module, code, message: message.into() }
    }

    pub fn usage(module: &'static str, message: impl Into<String>) -> Self {
        Self::new(module, EXIT_USAGE, message)
    }
}

pub fn core_code(e: &copydesc_core::Error) -> i32 {
    match e.category() {
        Category::Data => EXIT_DATA,
        Category::Numeric => EXIT_NUMERIC,
    }
}

pub trait Tag<T> {
    fn tag(self, module: &'static str) -> Result<T, Failure>;
}

impl<T> Tag<T> for Result<T, copydesc_core::Error> {
    fn tag(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(module, core_code(&e), e.to_string()))
    }
}

impl<T> Tag<T> for Result<T, AugError> {
    fn tag(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|e| {
            let code = match &e {
                AugError::Core(c) => core_code(c),
                AugError::Config(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            };
            Failure::new(module, code, e.to_string())
        })
    }
}

impl<T> Tag<T> for std::io::Result<T> {
    fn tag(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(module, EXIT_DATA, e.to_string()))
    }
}

impl<T> Tag<T> for serde_json::Result<T> {
    fn tag(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(module, EXIT_DATA, e.to_string()))
    }
}
