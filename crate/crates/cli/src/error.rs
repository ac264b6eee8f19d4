use fbzone_core::classify::ClassifyError;
use fbzone_core::model::ModelError;
use fbzone_core::pde::PdeError;
use fbzone_core::phaseplane::PhaseError;
use fbzone_core::semiwave::SemiWaveError;
use fbzone_core::spectral::SpectralError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    /// One JSON object on one line.
    pub fn line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            code: i32,
            message: String,
        }
        let line = Line { error: self.kind(), code: self.code(), message: self.to_string() };
        serde_json::to_string(&line).expect("plain strings serialise")
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

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NonPositive(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PhaseError> for CliError {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::Model(m) => m.into(),
            PhaseError::Domain(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SemiWaveError> for CliError {
    fn from(e: SemiWaveError) -> Self {
        match e {
            SemiWaveError::Model(m) => m.into(),
            SemiWaveError::NonPositiveMu(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::Model(m) => m.into(),
            PdeError::Config(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Model(m) => m.into(),
            ClassifyError::Phase(p) => p.into(),
            ClassifyError::Pde(p) => p.into(),
            ClassifyError::Input(_) => CliError::Validation(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(ModelError::CubicThreshold(0.7)).code(), 3);
        assert_eq!(CliError::from(PdeError::Config("dt".into())).code(), 3);
        assert_eq!(CliError::from(PdeError::NonFinite { t: 1.0 }).code(), 4);
        assert_eq!(CliError::from(ClassifyError::Pde(PdeError::NonFinite { t: 1.0 })).code(), 4);
        assert_eq!(CliError::from(SemiWaveError::NonPositiveMu(0.0)).code(), 3);
        assert_eq!(CliError::from(SpectralError::NoConvergence { r: 1.0, cells: 8 }).code(), 4);
    }

    #[test]
    fn error_line_is_single_json_object() {
        let line = CliError::Numerical("bad\nthing".into()).line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["code"], 4);
        assert_eq!(v["error"], "numerical");
    }
}
