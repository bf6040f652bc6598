//! Residual reports shared by the discrete and analytic checks.

use serde::Serialize;

/// Version tag written into every serialized report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub check: String,
    pub complex: String,
    pub degree: Option<usize>,
    pub scheme: Option<String>,
    pub times: Vec<f64>,
    pub abs_residuals: Vec<f64>,
    pub rel_residuals: Vec<f64>,
    /// `None` for diagnostics that carry no gate.
    pub tolerance: Option<f64>,
    /// `None` for diagnostics; otherwise every relative residual is within
    /// the tolerance.
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl VerificationReport {
    /// A gated report; `pass` is derived from the residuals.
    pub fn gated(
        check: impl Into<String>,
        complex: impl Into<String>,
        times: Vec<f64>,
        abs_residuals: Vec<f64>,
        rel_residuals: Vec<f64>,
        tolerance: f64,
    ) -> Self {
        let pass = rel_residuals.iter().all(|&r| r <= tolerance);
        Self {
            schema: SCHEMA_VERSION,
            check: check.into(),
            complex: complex.into(),
            degree: None,
            scheme: None,
            times,
            abs_residuals,
            rel_residuals,
            tolerance: Some(tolerance),
            pass: Some(pass),
            details: None,
        }
    }

    /// An informational report with no pass/fail gate.
    pub fn diagnostic(
        check: impl Into<String>,
        complex: impl Into<String>,
        abs_residuals: Vec<f64>,
        rel_residuals: Vec<f64>,
    ) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            check: check.into(),
            complex: complex.into(),
            degree: None,
            scheme: None,
            times: Vec::new(),
            abs_residuals,
            rel_residuals,
            tolerance: None,
            pass: None,
            details: None,
        }
    }

    pub fn with_degree(mut self, k: usize) -> Self {
        self.degree = Some(k);
        self
    }

    pub fn with_scheme(mut self, scheme: impl ToString) -> Self {
        self.scheme = Some(scheme.to_string());
        self
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }

    /// Overrides the derived pass flag, for checks whose verdict is not a
    /// plain threshold on `rel_residuals`.
    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }

    pub fn is_gated(&self) -> bool {
        self.tolerance.is_some()
    }

    /// True for passing gated reports and for all diagnostics.
    pub fn ok(&self) -> bool {
        self.pass.unwrap_or(true)
    }

    pub fn max_rel(&self) -> f64 {
        self.rel_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Stable file stem, e.g. `lemma1_torus8_identity_k1`.
    pub fn file_stem(&self) -> String {
        let mut s = format!("{}_{}", self.check, self.complex);
        if let Some(scheme) = &self.scheme {
            s.push('_');
            s.push_str(scheme);
        }
        if let Some(k) = self.degree {
            s.push_str(&format!("_k{k}"));
        }
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
            .collect()
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let verdict = match self.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        let tol = self
            .tolerance
            .map_or_else(|| "-".to_string(), |t| format!("{t:.0e}"));
        format!(
            "{verdict} {:<28} max rel {:.3e} (tol {tol})",
            self.file_stem(),
            self.max_rel()
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `‖a − b‖ / (‖a‖ + ε)` style relative error with the given absolute error.
pub(crate) fn relative(abs: f64, lhs_norm: f64) -> f64 {
    abs / (lhs_norm + f64::EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_tracks_tolerance() {
        let r = VerificationReport::gated("x", "m", vec![0.1, 1.0], vec![0.0; 2], vec![1e-10, 2e-8], 1e-8);
        assert_eq!(r.pass, Some(false));
        let r = VerificationReport::gated("x", "m", vec![0.1], vec![0.0], vec![1e-10], 1e-8);
        assert!(r.ok() && r.is_gated());
    }

    #[test]
    fn json_shape() {
        let r = VerificationReport::gated("lemma1", "torus8", vec![0.1], vec![1e-14], vec![1e-13], 1e-8)
            .with_degree(1)
            .with_scheme("identity");
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["schema", "check", "complex", "degree", "scheme", "times", "abs_residuals", "rel_residuals", "tolerance", "pass"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["schema"], 1);
        assert!(v.get("details").is_none());
        assert_eq!(r.file_stem(), "lemma1_torus8_identity_k1");
    }

    #[test]
    fn diagnostics_have_no_gate() {
        let r = VerificationReport::diagnostic("duality", "tetra", vec![0.5], vec![0.1]);
        assert!(r.ok() && !r.is_gated());
        assert!(r.summary().starts_with("INFO"));
    }
}
