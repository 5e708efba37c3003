//! Built-in runs with known outcomes, optionally with a tampered snapshot
//! to confirm the checks notice.

use std::sync::Arc;

use plap_core::analysis::{heat_comparison, lr_dissipation_check_with};
use plap_core::evolution::{evolve, trajectory_checks_with};
use plap_core::prox::InnerSolverConfig;
use plap_core::{build_field, Grid, InitialDatum, Trajectory64, WeightFamilySpec};

use crate::report::{Check, Report};
use crate::Result;

/// Factor applied to one interior snapshot of the tampered runs.
const CORRUPTION: f64 = 1.5;

fn trajectories() -> Result<Vec<(&'static str, Trajectory64)>> {
    let cfg = InnerSolverConfig::default();
    let grid = Arc::new(Grid::new(&[0.0], &[1.0], &[65])?);
    let field = Arc::new(build_field(&WeightFamilySpec::Identity, grid.clone())?);
    let sine = InitialDatum::SineProduct { amplitude: 1.0 }.build(&grid)?;
    let bump = InitialDatum::Bump {
        center: vec![0.4],
        radius: 0.3,
        amplitude: 1.0,
    }
    .build(&grid)?;
    Ok(vec![
        ("heat", evolve(&sine, 0.05, 20, 2.0, &field, &cfg)?),
        ("p3-bump", evolve(&bump, 0.05, 20, 3.0, &field, &cfg)?),
        ("p1.5-bump", evolve(&bump, 0.02, 20, 1.5, &field, &cfg)?),
    ])
}

fn checks(label: &str, traj: &Trajectory64, factor: f64) -> Result<Vec<Check>> {
    let prefixed = |c: Check| Check {
        name: format!("{label}: {}", c.name),
        ..c
    };
    let rep = trajectory_checks_with(traj, factor);
    let mut out: Vec<Check> = rep.verdicts().cloned().map(Check::from).map(prefixed).collect();
    if label == "heat" {
        let h = heat_comparison(traj, 1.0)?;
        out.push(prefixed(Check::new("heat discrete reference", h.discrete, 1e-8)));
    } else {
        let c = match lr_dissipation_check_with(traj, 2.0, factor) {
            Ok(r) => Check::from(r.verdict),
            Err(e) => Check::failed("L2 dissipation", e.to_string()),
        };
        out.push(prefixed(c));
    }
    Ok(out)
}

/// With `corrupt = false`: the clean runs must pass every check and the
/// tampered copies must each fail at least one. With `corrupt = true` the
/// report holds the checks of the tampered runs themselves.
pub fn self_test(corrupt: bool, factor: f64) -> Result<Report> {
    let mut all = Vec::new();
    for (label, traj) in trajectories()? {
        let bad = traj.with_scaled_snapshot(traj.steps() / 2, CORRUPTION)?;
        let tampered = checks(label, &bad, factor)?;
        if corrupt {
            all.extend(tampered);
        } else {
            all.extend(checks(label, &traj, factor)?);
            let caught = tampered.iter().filter(|c| !c.pass).count();
            all.push(
                Check::flag(format!("{label}: tampered snapshot detected"), caught > 0)
                    .value("failing_checks", caught as f64),
            );
        }
    }
    Ok(Report {
        scenario: if corrupt { "self-test (tampered)" } else { "self-test" }.into(),
        checks: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_runs_pass_and_tampering_is_caught() {
        assert!(self_test(false, 10.0).unwrap().pass());
        assert!(!self_test(true, 10.0).unwrap().pass());
    }
}
