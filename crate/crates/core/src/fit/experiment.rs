use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convert::{effective_width, expand_coefficients, factorize_with_width, FactorizeOptions, CERTIFICATE_RTOL};
use crate::error::{Error, Result};
use crate::kernel::Recurrence;
use crate::sample::{random_teacher, stream};

use super::train::{init_model, train, TrainConfig};
use super::{impulse_target, squared_error};

/// One experiment cell. `wall_time` is kept in memory only; the CSV carries
/// it relative to the depth-1 cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub depth: usize,
    pub width: usize,
    pub seed: u64,
    pub final_loss: f64,
    pub max_param_norm: f64,
    pub equiv_shallow_max_norm: f64,
    pub wall_time_rel: f64,
    #[serde(skip)]
    pub wall_time: f64,
}

impl ExperimentRecord {
    /// Record with the timing columns cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        ExperimentRecord {
            wall_time: 0.0,
            wall_time_rel: 0.0,
            ..self.clone()
        }
    }
}

fn relative_times(records: &mut [ExperimentRecord]) {
    let base_depth = records
        .iter()
        .map(|r| r.depth)
        .min()
        .unwrap_or(1);
    let seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
    let base: Vec<f64> = seeds
        .iter()
        .map(|&s| {
            records
                .iter()
                .find(|r| r.depth == base_depth && r.seed == s)
                .map_or(f64::NAN, |r| r.wall_time)
        })
        .collect();
    for (r, b) in records.iter_mut().zip(base) {
        r.wall_time_rel = if b > 0.0 { r.wall_time / b } else { 1.0 };
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherStudentConfig {
    pub seed: u64,
    pub depths: Vec<usize>,
    /// Student width `m`; the teacher for depth `l` has `l(m-1)+1` modes.
    pub width: usize,
    /// Teachers have `|b_i|, |c_i| <= c1`.
    pub c1: f64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub real_params: bool,
    #[serde(default)]
    pub allow_perturb: bool,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn one() -> usize {
    1
}

fn default_horizon() -> usize {
    crate::kernel::DEFAULT_HORIZON
}

/// Samples a teacher per `(depth, trial)`, factorizes it at that depth and
/// records the student's largest parameter modulus. Fails if any student
/// exceeds `2 c1^(2/(l+1))`. `final_loss` is the student-teacher kernel
/// squared error and `equiv_shallow_max_norm` the largest expansion
/// coefficient of the student.
pub fn teacher_student_experiment(config: &TeacherStudentConfig) -> Result<Vec<ExperimentRecord>> {
    if config.depths.is_empty() || config.depths.contains(&0) {
        return Err(Error::InvalidConfig("depths must be a nonempty list of positive integers".into()));
    }
    if config.width == 0 || config.trials == 0 || config.horizon == 0 {
        return Err(Error::InvalidConfig("width, trials and horizon must be positive".into()));
    }
    if !config.c1.is_finite() || config.c1 <= 0.0 {
        return Err(Error::InvalidConfig(format!("c1 must be positive, got {}", config.c1)));
    }
    let mut cells: Vec<(usize, u64)> = config
        .depths
        .iter()
        .flat_map(|&l| (0..config.trials as u64).map(move |t| (l, config.seed.wrapping_add(t))))
        .collect();
    cells.sort_unstable();
    cells.dedup();

    let opts = FactorizeOptions {
        allow_perturb: config.allow_perturb,
        allow_padding: false,
    };
    let mut records = cells
        .par_iter()
        .map(|&(depth, seed)| {
            let mut rng = stream(seed, depth as u64);
            let k = effective_width(depth, config.width);
            let teacher = random_teacher(&mut rng, k, config.c1, config.real_params);
            let start = Instant::now();
            let (student, _) = factorize_with_width(&teacher, depth, config.width, opts)?;
            let wall_time = start.elapsed().as_secs_f64();

            let bound = 2.0 * config.c1.powf(2.0 / (depth as f64 + 1.0));
            let measured = student.max_param_modulus();
            if measured > bound * (1.0 + CERTIFICATE_RTOL) {
                return Err(Error::CertificateViolated { depth, measured, bound });
            }
            let loss = squared_error(
                &student.kernel_by_simulation(config.horizon)?,
                &teacher.kernel(config.horizon),
            )?;
            Ok(ExperimentRecord {
                depth,
                width: config.width,
                seed,
                final_loss: loss,
                max_param_norm: measured,
                equiv_shallow_max_norm: expand_coefficients(&student)?.max_coefficient_modulus(),
                wall_time_rel: 1.0,
                wall_time,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    relative_times(&mut records);
    Ok(records)
}

/// Impulse-fitting sweep at fixed effective width, as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpulseSweep {
    pub shift: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    pub effective_width: usize,
    pub depths: Vec<usize>,
    #[serde(default)]
    pub train: TrainConfig,
}

impl ImpulseSweep {
    pub fn run(&self) -> Result<Vec<ExperimentRecord>> {
        depth_sweep_impulse(self.shift, self.horizon, self.effective_width, &self.depths, &self.train)
    }
}

/// Trains one model per depth `l` with `l(m-1)+1 = effective_width` on the
/// unit impulse at `shift`; depths that do not divide `effective_width - 1`
/// are skipped. Each depth draws its initialization from its own stream of
/// `config.seed`.
pub fn depth_sweep_impulse(
    shift: usize,
    horizon: usize,
    effective_width: usize,
    depths: &[usize],
    config: &TrainConfig,
) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    if effective_width == 0 {
        return Err(Error::InvalidConfig("effective width must be positive".into()));
    }
    let target = impulse_target(shift, horizon)?.kernel;
    let mut plan: Vec<(usize, usize)> = Vec::new();
    for &l in depths {
        if l == 0 || !(effective_width - 1).is_multiple_of(l) {
            info!("skipping depth {l}: {} is not a multiple of it", effective_width - 1);
            continue;
        }
        plan.push((l, (effective_width - 1) / l + 1));
    }
    plan.sort_unstable();
    plan.dedup();
    if plan.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no depth in {depths:?} is compatible with effective width {effective_width}"
        )));
    }

    let mut records = plan
        .par_iter()
        .map(|&(depth, width)| {
            let mut rng = stream(config.seed, depth as u64);
            let init = init_model(&mut rng, depth, width, config)?;
            let start = Instant::now();
            let outcome = train(&init, &target, config)?;
            let wall_time = start.elapsed().as_secs_f64();
            Ok(ExperimentRecord {
                depth,
                width,
                seed: config.seed,
                final_loss: outcome.final_loss(),
                max_param_norm: outcome.model.max_param_modulus(),
                equiv_shallow_max_norm: expand_coefficients(&outcome.model)?.max_coefficient_modulus(),
                wall_time_rel: 1.0,
                wall_time,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    relative_times(&mut records);
    Ok(records)
}
