//! Reproducible numerical experiments. Each returns an [`ExperimentReport`]
//! whose rows are deterministic functions of the inputs (and seed, where
//! randomness is involved).

mod decay;
mod noncompact;
mod orthonormal;
mod refined;
mod schatten_scan;
mod semiclassical;
mod translation;

pub use decay::decay_report;
pub use noncompact::{noncompactness_probe, unit_gaussian, ProbeWindow};
pub use orthonormal::{
    circle_extension_density, orthonormal_ratio, orthonormal_report, OrthonormalTruncation, TAIL_THRESHOLD,
};
pub use refined::{
    refined_strichartz_check, refined_strichartz_family, two_block_reduction, FamilyConfig,
    RefinedStrichartz,
};
pub use schatten_scan::schatten_scan;
pub use semiclassical::{semiclassical_scan, SemiclassicalKernel};
pub use translation::{decoupling_decay, translation_scaling, TranslationExperiment};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedExponent {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

/// A measured quantity compared against an upper threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
}

impl Diagnostic {
    pub fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Grid, quadrature and window provenance as key/value pairs.
    pub metadata: Vec<(String, String)>,
    pub fitted_exponents: Vec<FittedExponent>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ExperimentReport {
    pub(crate) fn new(name: &'static str, columns: &[&str]) -> Self {
        Self {
            name,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
            fitted_exponents: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub(crate) fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub(crate) fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub(crate) fn fit(&mut self, name: &str, value: f64, stderr: f64) {
        self.fitted_exponents.push(FittedExponent {
            name: name.to_string(),
            value,
            stderr,
        });
    }

    pub(crate) fn diagnose(&mut self, name: &'static str, value: f64, threshold: f64) {
        self.diagnostics.push(Diagnostic {
            name,
            value,
            threshold,
        });
    }

    /// Values of one column, top to bottom.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn fitted(&self, name: &str) -> Option<&FittedExponent> {
        self.fitted_exponents.iter().find(|f| f.name == name)
    }

    pub fn diagnostic(&self, name: &str) -> Option<&Diagnostic> {
        self.diagnostics.iter().find(|d| d.name == name)
    }

    /// First failing diagnostic as an error.
    pub fn check_diagnostics(&self) -> Result<()> {
        match self.diagnostics.iter().find(|d| !d.passed()) {
            Some(d) => Err(Error::DiagnosticViolation {
                name: d.name,
                value: d.value,
                threshold: d.threshold,
            }),
            None => Ok(()),
        }
    }
}

pub(crate) fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_accessors() {
        let mut r = ExperimentReport::new("demo", &["a", "b"]);
        r.push_row(vec![1.0, 2.0]);
        r.push_row(vec![3.0, 4.0]);
        r.fit("slope", 0.5, 0.01);
        r.diagnose("tail", 0.01, 0.05);
        assert_eq!(r.column("b").unwrap(), vec![2.0, 4.0]);
        assert!(r.column("c").is_none());
        assert_eq!(r.fitted("slope").unwrap().value, 0.5);
        assert!(r.check_diagnostics().is_ok());
        r.diagnose("mass", 0.2, 0.1);
        assert!(matches!(
            r.check_diagnostics(),
            Err(Error::DiagnosticViolation { name: "mass", .. })
        ));
    }
}
