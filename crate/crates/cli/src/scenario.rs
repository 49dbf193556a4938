use ness_core::gaussian::response_closed_form;
use ness_core::liouvillian::{
    build_commutator_generator, build_lindblad_generator, first_order_correction, fock_leakage, steady_state,
};
use ness_core::response::{
    agarwal_source, commutator_source, convolve, entropy_source, nonlinear_reference, response_from_sources,
    response_kubo_k1, response_kubo_k2, susceptibility_source, FormLabel, ResponseCurve, Trajectory,
};
use ness_core::{Operator, Result};
use rayon::prelude::*;

use crate::config::{ModelKind, Scenario};
use crate::report::{compare, EquivalenceReport, LeakageRow, SteadyInfo};

/// Form used for the linear prediction, first available wins.
const TRAJECTORY_PRIORITY: [FormLabel; 7] = [
    FormLabel::R3,
    FormLabel::R1,
    FormLabel::R2,
    FormLabel::R2alt,
    FormLabel::K2,
    FormLabel::K1,
    FormLabel::Analytic,
];

pub struct TrajectoryTable {
    pub source: FormLabel,
    pub linear: Trajectory,
    pub nonlinear: Option<Trajectory>,
}

pub struct RunOutput {
    /// In `FormLabel::ALL` order.
    pub curves: Vec<ResponseCurve>,
    pub trajectory: Option<TrajectoryTable>,
    pub report: EquivalenceReport,
}

fn is_open(f: FormLabel) -> bool {
    matches!(f, FormLabel::R1 | FormLabel::R2 | FormLabel::R2alt | FormLabel::R3)
}

fn open_curves(s: &Scenario, forms: &[FormLabel]) -> Result<(Vec<ResponseCurve>, Option<SteadyInfo>, Vec<f64>)> {
    let two_osc = matches!(s.kind, ModelKind::TwoOscillator { .. });
    if forms.is_empty() && !two_osc {
        return Ok((Vec::new(), None, Vec::new()));
    }
    let hbar = s.model.hbar();
    let l0 = build_lindblad_generator(&s.model);
    let steady = steady_state(&l0)?;
    let pi0 = &steady.pi0;
    let leakage = if two_osc { fock_leakage(pi0) } else { Vec::new() };
    let l1 = build_commutator_generator(&s.perturbation, hbar)?;

    let sources = forms
        .par_iter()
        .map(|&f| -> Result<(FormLabel, Operator)> {
            let y = match f {
                FormLabel::R1 => agarwal_source(&l1, pi0)?,
                FormLabel::R2 => entropy_source(&l0, &first_order_correction(&l0, &l1, pi0)?),
                FormLabel::R2alt => susceptibility_source(&s.model, &l0, &s.perturbation, s.eps_fd)?,
                FormLabel::R3 => commutator_source(&s.perturbation, pi0, hbar),
                _ => unreachable!("closed form routed to open solver"),
            };
            Ok((f, y))
        })
        .collect::<Result<Vec<_>>>()?;
    let curves = if sources.is_empty() {
        Vec::new()
    } else {
        response_from_sources(&s.observable, &l0, &s.grid, &sources)?
    };
    Ok((curves, Some(SteadyInfo::from(&steady)), leakage))
}

fn closed_curves(s: &Scenario, forms: &[FormLabel]) -> Result<Vec<ResponseCurve>> {
    forms
        .par_iter()
        .map(|&f| {
            let hbar = s.model.hbar();
            let h0 = s.model.h0();
            match (f, &s.kind) {
                (FormLabel::Analytic, ModelKind::TwoOscillator { params, .. }) => {
                    let tau = s.grid.points().to_vec();
                    let values = tau.iter().map(|&t| response_closed_form(params, t)).collect::<Result<_>>()?;
                    Ok(ResponseCurve::new(f, tau, values))
                }
                (FormLabel::K1, ModelKind::Generic { beta: Some(beta) }) => {
                    response_kubo_k1(&s.observable, h0, &s.perturbation, *beta, &s.grid, hbar)
                }
                (FormLabel::K2, ModelKind::Generic { beta: Some(beta) }) => {
                    response_kubo_k2(&s.observable, h0, &s.perturbation, *beta, &s.grid, hbar)
                }
                _ => unreachable!("form {f} rejected during validation"),
            }
        })
        .collect()
}

pub fn run(s: &Scenario) -> Result<RunOutput> {
    let (open, closed): (Vec<FormLabel>, Vec<FormLabel>) = s.forms.iter().partition(|&&f| is_open(f));
    let (open_result, closed_result) = rayon::join(|| open_curves(s, &open), || closed_curves(s, &closed));
    let (mut curves, steady, leakage) = open_result?;
    curves.extend(closed_result?);
    curves.sort_by_key(|c| FormLabel::ALL.iter().position(|&l| l == c.label));

    let trajectory = match &s.protocol {
        Some(protocol) => {
            let source = TRAJECTORY_PRIORITY
                .iter()
                .find_map(|&l| curves.iter().find(|c| c.label == l))
                .expect("at least one form is requested");
            let linear = convolve(source, protocol)?;
            let nonlinear = if s.nonlinear {
                Some(nonlinear_reference(&s.model, &s.perturbation, protocol, &s.observable, &s.grid)?)
            } else {
                None
            };
            Some(TrajectoryTable { source: source.label, linear, nonlinear })
        }
        None => None,
    };

    let leakage_tolerance = match s.kind {
        ModelKind::TwoOscillator { leakage_tolerance, .. } => leakage_tolerance,
        ModelKind::Generic { .. } => 0.0,
    };
    let report = EquivalenceReport {
        pairs: compare(&curves, &s.tolerances),
        leakage: leakage
            .iter()
            .enumerate()
            .map(|(k, &population)| LeakageRow { mode: k + 1, population, tolerance: leakage_tolerance })
            .collect(),
        steady,
    };
    Ok(RunOutput { curves, trajectory, report })
}
