//! Kernel-space fitting and the teacher-student / impulse experiments.

mod experiment;
mod gradient;
mod train;

pub use experiment::{
    depth_sweep_impulse, teacher_student_experiment, ExperimentRecord, ImpulseSweep, TeacherStudentConfig,
};
pub use gradient::{kernel_gradient, ModelGradient};
pub use train::{init_model, train, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};
use crate::kernel::Recurrence;
use crate::model::{ConvolutionKernel, DeepLinearSsm};
use crate::C64;

/// Kernel with a single unit tap at `shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpulseTarget {
    pub shift: usize,
    pub kernel: ConvolutionKernel,
}

pub fn impulse_target(shift: usize, horizon: usize) -> Result<ImpulseTarget> {
    if shift >= horizon {
        return Err(Error::ShiftOutOfHorizon { shift, horizon });
    }
    let mut taps = vec![C64::new(0.0, 0.0); horizon];
    taps[shift] = C64::new(1.0, 0.0);
    Ok(ImpulseTarget {
        shift,
        kernel: ConvolutionKernel { taps },
    })
}

/// `sum_t |rho_model(t) - rho_target(t)|^2`. The model kernel is evaluated
/// on the target's horizon.
pub fn kernel_loss(model: &DeepLinearSsm, target: &ConvolutionKernel) -> Result<f64> {
    let k = model.kernel_by_simulation(target.horizon())?;
    squared_error(&k, target)
}

/// Squared distance between two kernels of the same horizon.
pub fn squared_error(k: &ConvolutionKernel, target: &ConvolutionKernel) -> Result<f64> {
    if k.horizon() != target.horizon() {
        return Err(Error::HorizonMismatch {
            expected: k.horizon(),
            actual: target.horizon(),
        });
    }
    Ok(k.taps.iter().zip(&target.taps).map(|(a, b)| (a - b).norm_sqr()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_model, stream, ModelSpec};

    #[test]
    fn impulse_targets() {
        let t = impulse_target(0, 8).unwrap();
        assert_eq!(t.kernel.taps[0], C64::new(1.0, 0.0));
        assert!(t.kernel.taps[1..].iter().all(|z| z.norm() == 0.0));
        let t = impulse_target(3, 8).unwrap();
        for (i, z) in t.kernel.taps.iter().enumerate() {
            assert_eq!(z.re, if i == 3 { 1.0 } else { 0.0 });
        }
        assert!(matches!(
            impulse_target(8, 8),
            Err(Error::ShiftOutOfHorizon { shift: 8, horizon: 8 })
        ));
    }

    #[test]
    fn loss_cases() {
        let mut rng = stream(3, 0);
        let model = random_model(&mut rng, 2, 3, ModelSpec::default());
        let own = model.kernel_by_simulation(20).unwrap();
        assert_eq!(kernel_loss(&model, &own).unwrap(), 0.0);

        let mut zero = model.clone();
        zero.read_out.fill(C64::new(0.0, 0.0));
        assert_eq!(kernel_loss(&zero, &impulse_target(4, 20).unwrap().kernel).unwrap(), 1.0);

        let other = random_model(&mut rng, 2, 3, ModelSpec::default()).kernel_by_simulation(20).unwrap();
        let mut direct = 0.0;
        for t in 0..20 {
            let d = own.taps[t] - other.taps[t];
            direct += d.re * d.re + d.im * d.im;
        }
        let loss = kernel_loss(&model, &other).unwrap();
        assert!((loss - direct).abs() <= 1e-12 * direct);

        assert!(matches!(
            squared_error(&own, &impulse_target(0, 5).unwrap().kernel),
            Err(Error::HorizonMismatch { expected: 20, actual: 5 })
        ));
    }
}
