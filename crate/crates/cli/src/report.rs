use std::fmt::Write;

use ness_core::liouvillian::SteadyStateSolution;
use ness_core::response::{FormLabel, ResponseCurve};

use crate::config::ToleranceConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Check {
    Absolute(f64),
    Relative(f64),
    /// Pair not expected to agree.
    Unchecked(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairRow {
    pub a: FormLabel,
    pub b: FormLabel,
    pub max_abs: f64,
    /// `max|R_a − R_b| / max(max|R_a|, max|R_b|)`.
    pub max_rel: f64,
    pub check: Check,
}

impl PairRow {
    pub fn pass(&self) -> Option<bool> {
        match self.check {
            Check::Absolute(t) => Some(self.max_abs <= t),
            Check::Relative(t) => Some(self.max_rel <= t),
            Check::Unchecked(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeakageRow {
    pub mode: usize,
    pub population: f64,
    pub tolerance: f64,
}

impl LeakageRow {
    pub fn pass(&self) -> bool {
        self.population <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyInfo {
    pub residual_norm: f64,
    pub spectral_gap: Option<f64>,
    pub sector_dim: usize,
}

impl From<&SteadyStateSolution> for SteadyInfo {
    fn from(s: &SteadyStateSolution) -> Self {
        Self {
            residual_norm: s.residual_norm,
            spectral_gap: s.spectral_gap,
            sector_dim: s.sector_dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub pairs: Vec<PairRow>,
    pub leakage: Vec<LeakageRow>,
    pub steady: Option<SteadyInfo>,
}

fn is_closed(l: FormLabel) -> bool {
    matches!(l, FormLabel::K1 | FormLabel::K2)
}

fn check_for(a: FormLabel, b: FormLabel, tol: &ToleranceConfig) -> Check {
    if is_closed(a) != is_closed(b) {
        return Check::Unchecked("closed-system limit");
    }
    if a == FormLabel::Analytic || b == FormLabel::Analytic {
        Check::Relative(tol.analytic)
    } else if a == FormLabel::R2alt || b == FormLabel::R2alt {
        Check::Absolute(tol.finite_difference)
    } else {
        Check::Absolute(tol.exact)
    }
}

/// Every unordered pair of curves, once.
pub fn compare(curves: &[ResponseCurve], tol: &ToleranceConfig) -> Vec<PairRow> {
    let mut rows = Vec::new();
    for (i, x) in curves.iter().enumerate() {
        for y in &curves[i + 1..] {
            let max_abs = x.max_abs_diff(y);
            let scale = x.max_abs().max(y.max_abs());
            let max_rel = if scale > 0.0 {
                max_abs / scale
            } else if max_abs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            rows.push(PairRow {
                a: x.label,
                b: y.label,
                max_abs,
                max_rel,
                check: check_for(x.label, y.label, tol),
            });
        }
    }
    rows
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.pass() != Some(false)) && self.leakage.iter().all(LeakageRow::pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        writeln!(out, "# pairwise deviations").unwrap();
        writeln!(out, "pair max_abs max_rel criterion status").unwrap();
        for p in &self.pairs {
            let (criterion, status) = match (p.check, p.pass()) {
                (Check::Absolute(t), Some(ok)) => (format!("abs<={t:e}"), verdict(ok)),
                (Check::Relative(t), Some(ok)) => (format!("rel<={t:e}"), verdict(ok)),
                (Check::Unchecked(why), _) => (format!("none({})", why.replace(' ', "-")), "INFO"),
                _ => unreachable!(),
            };
            writeln!(out, "{}-{} {:.6e} {:.6e} {criterion} {status}", p.a, p.b, p.max_abs, p.max_rel).unwrap();
        }
        if !self.leakage.is_empty() {
            writeln!(out, "# truncation leakage (top Fock level population)").unwrap();
            for l in &self.leakage {
                writeln!(
                    out,
                    "mode{} {:.6e} <={:e} {}",
                    l.mode,
                    l.population,
                    l.tolerance,
                    verdict(l.pass())
                )
                .unwrap();
            }
        }
        if let Some(s) = &self.steady {
            writeln!(out, "# steady state").unwrap();
            writeln!(out, "residual_norm {:.6e}", s.residual_norm).unwrap();
            match s.spectral_gap {
                Some(g) => writeln!(out, "spectral_gap {g:.6e}").unwrap(),
                None => writeln!(out, "spectral_gap not computed (sector too large)").unwrap(),
            }
            writeln!(out, "sector_dim {}", s.sector_dim).unwrap();
        }
        writeln!(out, "overall {}", verdict(self.passed())).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(label: FormLabel, values: &[f64]) -> ResponseCurve {
        let tau = (0..values.len()).map(|k| k as f64).collect();
        ResponseCurve::new(label, tau, values.to_vec())
    }

    #[test]
    fn every_pair_once_with_its_criterion() {
        let tol = ToleranceConfig::default();
        let curves = vec![
            curve(FormLabel::R1, &[1.0, 0.5]),
            curve(FormLabel::R2alt, &[1.0, 0.500001]),
            curve(FormLabel::R3, &[1.0, 0.5]),
            curve(FormLabel::K2, &[0.0, 0.1]),
            curve(FormLabel::Analytic, &[1.0004, 0.5]),
        ];
        let rows = compare(&curves, &tol);
        assert_eq!(rows.len(), 10);
        let find = |a, b| rows.iter().find(|r| r.a == a && r.b == b).unwrap();
        assert_eq!(find(FormLabel::R1, FormLabel::R3).check, Check::Absolute(1e-8));
        assert_eq!(find(FormLabel::R1, FormLabel::R2alt).check, Check::Absolute(1e-5));
        assert_eq!(find(FormLabel::R3, FormLabel::Analytic).check, Check::Relative(1e-3));
        assert_eq!(find(FormLabel::R3, FormLabel::K2).pass(), None);
        let r = find(FormLabel::R3, FormLabel::Analytic);
        assert!((r.max_rel - 0.0004 / 1.0004).abs() < 1e-12);
        let report = EquivalenceReport { pairs: rows, leakage: vec![], steady: None };
        assert!(report.passed());
        assert!(report.render().ends_with("overall PASS\n"));
    }

    #[test]
    fn failures_propagate() {
        let tol = ToleranceConfig::default();
        let curves = vec![curve(FormLabel::R1, &[1.0]), curve(FormLabel::R2, &[1.1])];
        let mut report = EquivalenceReport { pairs: compare(&curves, &tol), leakage: vec![], steady: None };
        assert!(!report.passed());
        report.pairs.clear();
        report.leakage.push(LeakageRow { mode: 1, population: 1e-6, tolerance: 1e-8 });
        assert!(!report.passed());
        assert!(report.render().contains("mode1 1.000000e-6 <=1e-8 FAIL"));
    }
}
