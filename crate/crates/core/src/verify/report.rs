use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::integrate::IntegralResult;

/// Pass rule: `rel_error ≤ rel_tol` or `abs_error ≤ abs_floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel_tol: f64,
    pub abs_floor: f64,
}

/// Non-finite numbers are written as JSON `null` and read back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    fn out(v: f64) -> Option<f64> {
        v.is_finite().then_some(v)
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        out(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub mod pairs {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[[f64; 2]], s: S) -> Result<S::Ok, S::Error> {
            let o: Vec<[Option<f64>; 2]> = v.iter().map(|[a, b]| [out(*a), out(*b)]).collect();
            o.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<[f64; 2]>, D::Error> {
            let o = Vec::<[Option<f64>; 2]>::deserialize(d)?;
            Ok(o.into_iter().map(|[a, b]| [a.unwrap_or(f64::NAN), b.unwrap_or(f64::NAN)]).collect())
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub integrator: String,
    pub evaluations: u64,
    #[serde(with = "nullable")]
    pub max_error_estimate: f64,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub chain: String,
    pub inputs_digest: String,
    /// `[re, im]` pairs.
    #[serde(with = "nullable::pairs")]
    pub lhs: Vec<[f64; 2]>,
    #[serde(with = "nullable::pairs")]
    pub rhs: Vec<[f64; 2]>,
    #[serde(with = "nullable")]
    pub abs_error: f64,
    #[serde(with = "nullable")]
    pub rel_error: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
    pub diagnostics: Diagnostics,
    pub wall_time_ms: f64,
}

pub fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

/// Accumulates compared values and integrator statistics for one report.
#[derive(Debug)]
pub(crate) struct ReportBuilder {
    check_id: String,
    chain: String,
    digest_parts: Vec<String>,
    lhs: Vec<Complex64>,
    rhs: Vec<Complex64>,
    diagnostics: Diagnostics,
    forced_failure: bool,
    exact: bool,
    started: Instant,
}

impl ReportBuilder {
    pub fn new(check_id: &str, chain: &str, integrator: String) -> ReportBuilder {
        ReportBuilder {
            check_id: check_id.to_string(),
            chain: chain.to_string(),
            digest_parts: vec![check_id.to_string(), chain.to_string()],
            lhs: vec![],
            rhs: vec![],
            diagnostics: Diagnostics { integrator, ..Diagnostics::default() },
            forced_failure: false,
            exact: false,
            started: Instant::now(),
        }
    }

    /// Exact comparisons: pass requires zero error.
    pub fn exact(mut self) -> ReportBuilder {
        self.exact = true;
        self
    }

    pub fn input(&mut self, part: impl Into<String>) {
        self.digest_parts.push(part.into());
    }

    pub fn diagnostics_integrator(&mut self, name: &str) {
        self.diagnostics.integrator = name.to_string();
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.diagnostics.notes.push(note.into());
    }

    pub fn track(&mut self, r: &IntegralResult) -> Complex64 {
        self.diagnostics.evaluations += r.evaluations;
        self.diagnostics.max_error_estimate = self.diagnostics.max_error_estimate.max(r.error_estimate);
        r.value
    }

    pub fn compare(&mut self, lhs: Complex64, rhs: Complex64) {
        self.lhs.push(lhs);
        self.rhs.push(rhs);
    }

    /// Records a structural success (`1 = 1`) or failure (`0 ≠ 1`).
    pub fn certify(&mut self, ok: bool, what: impl Into<String>) {
        let one = Complex64::new(1.0, 0.0);
        self.compare(if ok { one } else { Complex64::new(0.0, 0.0) }, one);
        let w = what.into();
        if !ok {
            self.forced_failure = true;
        }
        self.note(w);
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        self.forced_failure = true;
        self.note(why);
    }

    /// Pass band given as an absolute error only.
    pub fn finish_abs(self, abs_floor: f64) -> VerificationReport {
        self.finish_with(Some(Tolerance { rel_tol: 0.0, abs_floor }), 0.0, 0.0)
    }

    pub fn finish(self, rel_tol: f64, floor_factor: f64) -> VerificationReport {
        self.finish_with(None, rel_tol, floor_factor)
    }

    fn finish_with(self, fixed: Option<Tolerance>, rel_tol: f64, floor_factor: f64) -> VerificationReport {
        let mut abs_error: f64 = 0.0;
        let mut rel_error: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (l, r) in self.lhs.iter().zip(&self.rhs) {
            let d = (l - r).norm();
            abs_error = abs_error.max(d);
            scale = scale.max(l.norm()).max(r.norm());
            let rel = if d == 0.0 { 0.0 } else { d / r.norm() };
            rel_error = rel_error.max(rel);
        }
        let nonfinite = self.lhs.iter().chain(&self.rhs).any(|z| !(z.re.is_finite() && z.im.is_finite()));
        let tolerance = if self.exact {
            Tolerance { rel_tol: 0.0, abs_floor: 0.0 }
        } else if let Some(t) = fixed {
            t
        } else {
            Tolerance { rel_tol, abs_floor: floor_factor * scale }
        };
        if self.forced_failure || nonfinite {
            abs_error = abs_error.max(1.0);
            rel_error = rel_error.max(1.0);
            if nonfinite {
                abs_error = f64::INFINITY;
                rel_error = f64::INFINITY;
            }
        }
        let pass = !self.forced_failure
            && !nonfinite
            && (rel_error <= tolerance.rel_tol || abs_error <= tolerance.abs_floor);
        let parts: Vec<&str> = self.digest_parts.iter().map(String::as_str).collect();
        VerificationReport {
            inputs_digest: digest(&parts),
            check_id: self.check_id,
            chain: self.chain,
            lhs: self.lhs.iter().map(|z| [z.re, z.im]).collect(),
            rhs: self.rhs.iter().map(|z| [z.re, z.im]).collect(),
            abs_error,
            rel_error,
            tolerance,
            pass,
            diagnostics: self.diagnostics,
            wall_time_ms: self.started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pass_rule_is_rel_or_abs() {
        let mut b = ReportBuilder::new("x", "chain", "gauss".into());
        b.compare(c(1.0 + 1e-7), c(1.0));
        let r = b.finish(1e-5, 1e-12);
        assert!(r.pass);
        assert!((r.rel_error - 1e-7).abs() < 1e-12);

        let mut b = ReportBuilder::new("x", "chain", "gauss".into());
        b.compare(c(1e-3), c(2e-3));
        assert!(!b.finish(1e-5, 1e-12).pass);

        // near-zero values fall under the absolute floor
        let mut b = ReportBuilder::new("x", "chain", "gauss".into());
        b.compare(c(5.0), c(5.0));
        b.compare(c(1e-13), c(2e-13));
        let r = b.finish(1e-5, 1e-12);
        assert!(r.rel_error > 0.1 && r.pass);
    }

    #[test]
    fn certificate_failure_has_unit_error() {
        let mut b = ReportBuilder::new("main1", "chain", "structural".into());
        b.certify(false, "refused");
        let r = b.finish(1e-5, 1e-12);
        assert!(!r.pass);
        assert_eq!(r.abs_error, 1.0);
    }

    #[test]
    fn exact_reports_need_zero_error() {
        let mut b = ReportBuilder::new("main2", "s4", "exact".into()).exact();
        b.compare(c(0.5), c(0.5));
        assert!(b.finish(1e-5, 1e-12).pass);
        let mut b = ReportBuilder::new("main2", "s4", "exact".into()).exact();
        b.compare(c(0.5), c(0.5 + 1e-15));
        assert!(!b.finish(1e-5, 1e-12).pass);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&["a", "b"]), digest(&["a", "b"]));
        assert_ne!(digest(&["ab"]), digest(&["a", "b"]));
    }
}
