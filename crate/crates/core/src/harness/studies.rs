use crate::analysis::{check_assumptions, occupation_time, AssumptionReport, OccupationStats};
use crate::error::Result;
use crate::solver::SchemeKind;

use super::config::ExperimentConfig;

/// Surface samples drawn by [`run_check`].
pub const CHECK_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct OccupationReport {
    pub model: String,
    pub scheme: SchemeKind,
    pub stats: OccupationStats,
    pub warnings: Vec<String>,
}

/// Occupation study with the first configured scheme and
/// `2^occupation_steps_log2` steps.
pub fn run_occupation(cfg: &ExperimentConfig) -> Result<OccupationReport> {
    let spec = cfg.model_spec()?;
    let scheme = cfg.schemes[0];
    let sim = spec.simulator(scheme)?;
    let steps = 1usize << cfg.occupation_steps_log2;
    let stats =
        cfg.install(|| occupation_time(&sim, spec.surface(), cfg.n_paths, steps, &cfg.eps_grid, cfg.seed))??;
    let mut warnings = Vec::new();
    match stats.fitted_exponent {
        None => warnings.push("some tube was never visited; exponent undefined".to_string()),
        Some(e) if e.abs() < 0.1 => {
            warnings.push(format!("occupation is flat in eps (exponent {e}); is the path stuck on the surface?"))
        }
        Some(_) => {}
    }
    Ok(OccupationReport { model: spec.name.clone(), scheme, stats, warnings })
}

pub fn run_check(cfg: &ExperimentConfig) -> Result<AssumptionReport> {
    let spec = cfg.model_spec()?;
    Ok(check_assumptions(&spec, CHECK_SAMPLES, cfg.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_model_warns() {
        let cfg =
            ExperimentConfig { model: "pinned".into(), n_paths: 4, occupation_steps_log2: 6, ..Default::default() };
        let r = run_occupation(&cfg).unwrap();
        assert!(r.stats.occupation.iter().all(|o| *o == 1.0));
        assert_eq!(r.stats.fitted_exponent, Some(0.0));
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn single_eps_is_an_error() {
        let cfg = ExperimentConfig { eps_grid: vec![0.1], n_paths: 4, occupation_steps_log2: 4, ..Default::default() };
        assert!(run_occupation(&cfg).is_err());
    }

    #[test]
    fn check_flags_broken_model() {
        let cfg = ExperimentConfig { model: "tangential".into(), ..Default::default() };
        assert!(!run_check(&cfg).unwrap().all_passed());
        let cfg = ExperimentConfig { model: "circle".into(), ..Default::default() };
        assert!(run_check(&cfg).unwrap().all_passed());
    }
}
