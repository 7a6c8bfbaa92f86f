//! Black-box coarse maps and the lift / evolve / restrict coarse timestepper.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Random generator used by every stochastic component.
///
/// ChaCha8 with a 64-bit seed: portable, reproducible across platforms, and
/// with a period far beyond anything a run can consume.
pub type SimRng = ChaCha8Rng;

/// Seeds a [`SimRng`] from a 64-bit value.
pub fn sim_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// A discrete-time map `x_{k+1} = F_T(x_k, p)` over a coarse state.
pub trait CoarseMap: Send + Sync {
    /// State dimension `n`.
    fn dim(&self) -> usize;

    /// Parameter dimension `m`.
    fn param_dim(&self) -> usize;

    /// Reporting horizon `T` (informational).
    fn horizon(&self) -> f64 {
        1.0
    }

    fn is_stochastic(&self) -> bool {
        false
    }

    /// Raw evaluation. Prefer [`CoarseMap::evaluate`], which checks the output.
    fn apply(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>>;

    /// Evaluates the map and checks that the image has `n` finite entries.
    fn evaluate(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let y = self.apply(x, p)?;
        if y.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                context: format!("F({x:?}) = {y:?}"),
            });
        }
        Ok(y)
    }
}

impl<M: CoarseMap + ?Sized> CoarseMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn horizon(&self) -> f64 {
        (**self).horizon()
    }
    fn is_stochastic(&self) -> bool {
        (**self).is_stochastic()
    }
    fn apply(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        (**self).apply(x, p)
    }
}

impl<M: CoarseMap + ?Sized> CoarseMap for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn horizon(&self) -> f64 {
        (**self).horizon()
    }
    fn is_stochastic(&self) -> bool {
        (**self).is_stochastic()
    }
    fn apply(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        (**self).apply(x, p)
    }
}

/// Deterministic map backed by a closure.
pub struct FnMap<F> {
    dim: usize,
    param_dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, param_dim: usize, f: F) -> Self {
        Self { dim, param_dim, f }
    }
}

impl<F> CoarseMap for FnMap<F>
where
    F: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn param_dim(&self) -> usize {
        self.param_dim
    }
    fn apply(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(x, p))
    }
}

/// Returns the trajectory `x0, F(x0), ..., F^k(x0)`.
pub fn iterate<M: CoarseMap + ?Sized>(
    map: &M,
    x0: &[f64],
    p: &[f64],
    k: usize,
) -> Result<Vec<Vec<f64>>> {
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InfeasibleState(format!("non-finite initial state {x0:?}")));
    }
    let mut traj = Vec::with_capacity(k + 1);
    traj.push(x0.to_vec());
    for step in 1..=k {
        let last = traj.last().expect("trajectory is never empty");
        match map.evaluate(last, p) {
            Ok(next) => traj.push(next),
            Err(Error::Evaluation { .. }) => {
                return Err(Error::Divergence {
                    step,
                    last: last.clone(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

/// Settings of an ensemble coarse timestepper.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimestepperConfig {
    /// Horizon of a single microscopic simulator call.
    pub micro_horizon: f64,
    /// Reporting horizon `T` of the coarse map.
    pub reporting_horizon: f64,
    /// Number of independent realizations averaged per evaluation.
    pub realizations: usize,
    /// Realization `r` is seeded with `master_seed + r`.
    pub master_seed: u64,
}

impl TimestepperConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.micro_horizon > 0.0
            && self.micro_horizon.is_finite()
            && self.reporting_horizon >= self.micro_horizon
            && self.reporting_horizon.is_finite()
            && self.realizations >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "timestepper requires T >= T_U > 0 and N_r >= 1, got {self:?}"
            )))
        }
    }

    /// Seed of realization `r`.
    pub fn realization_seed(&self, r: usize) -> u64 {
        self.master_seed.wrapping_add(r as u64)
    }
}

/// A microscopic simulator advancing a detailed state in time.
pub trait MicroModel: Send + Sync {
    type State: Send;

    /// Advances `state` by `horizon` time units.
    fn evolve(&self, state: &mut Self::State, p: &[f64], horizon: f64, rng: &mut SimRng) -> Result<()>;
}

/// Maps a coarse state to a consistent microscopic configuration.
pub trait LiftOp<S>: Send + Sync {
    fn lift(&self, x: &[f64], rng: &mut SimRng) -> Result<S>;
}

/// Maps a microscopic configuration to its coarse observables.
pub trait RestrictOp<S>: Send + Sync {
    fn coarse_dim(&self) -> usize;
    fn restrict(&self, state: &S) -> Vec<f64>;
}

/// Ensemble mean and standard error of one timestepper evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Per-realization restricted states, in realization order.
    pub samples: Vec<Vec<f64>>,
}

/// Coarse map built from lift, microscopic evolution and restriction,
/// averaged over an ensemble of seeded realizations.
pub struct CoarseTimestepper<M, L, R> {
    micro: M,
    lift: L,
    restrict: R,
    config: TimestepperConfig,
    param_dim: usize,
}

/// Wraps a microscopic simulator as a [`CoarseMap`].
pub fn make_coarse_timestepper<M, L, R>(
    micro: M,
    lift: L,
    restrict: R,
    config: TimestepperConfig,
    param_dim: usize,
) -> Result<CoarseTimestepper<M, L, R>>
where
    M: MicroModel,
    L: LiftOp<M::State>,
    R: RestrictOp<M::State>,
{
    config.validate()?;
    Ok(CoarseTimestepper {
        micro,
        lift,
        restrict,
        config,
        param_dim,
    })
}

impl<M, L, R> CoarseTimestepper<M, L, R>
where
    M: MicroModel,
    L: LiftOp<M::State>,
    R: RestrictOp<M::State>,
{
    pub fn config(&self) -> &TimestepperConfig {
        &self.config
    }

    pub fn micro(&self) -> &M {
        &self.micro
    }

    fn run_realization(&self, x: &[f64], p: &[f64], r: usize) -> Result<Vec<f64>> {
        let mut rng = sim_rng(self.config.realization_seed(r));
        let mut state = self.lift.lift(x, &mut rng)?;
        let total = self.config.reporting_horizon;
        let chunk = self.config.micro_horizon;
        let mut elapsed = 0.0;
        while elapsed < total * (1.0 - 1e-12) {
            let h = chunk.min(total - elapsed);
            self.micro.evolve(&mut state, p, h, &mut rng)?;
            elapsed += h;
        }
        Ok(self.restrict.restrict(&state))
    }

    /// Evaluates the ensemble and returns mean, standard error and samples.
    pub fn evaluate_stats(&self, x: &[f64], p: &[f64]) -> Result<EnsembleStats> {
        let samples: Vec<Vec<f64>> = (0..self.config.realizations)
            .into_par_iter()
            .map(|r| self.run_realization(x, p, r))
            .collect::<Result<_>>()?;
        let n = self.restrict.coarse_dim();
        let count = samples.len() as f64;
        // fixed realization order keeps the sum independent of scheduling
        let mut mean = vec![0.0; n];
        for s in &samples {
            for (m, v) in mean.iter_mut().zip(s) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; n];
        for s in &samples {
            for ((acc, v), m) in var.iter_mut().zip(s).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let std_error = var
            .into_iter()
            .map(|v| {
                if samples.len() > 1 {
                    (v / (count - 1.0) / count).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(EnsembleStats {
            mean,
            std_error,
            samples,
        })
    }
}

impl<M, L, R> CoarseMap for CoarseTimestepper<M, L, R>
where
    M: MicroModel,
    L: LiftOp<M::State>,
    R: RestrictOp<M::State>,
{
    fn dim(&self) -> usize {
        self.restrict.coarse_dim()
    }
    fn param_dim(&self) -> usize {
        self.param_dim
    }
    fn horizon(&self) -> f64 {
        self.config.reporting_horizon
    }
    fn is_stochastic(&self) -> bool {
        true
    }
    fn apply(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate_stats(x, p)?.mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn iterate_fixed_point_is_constant() {
        let map = FnMap::new(2, 0, |x: &[f64], _p: &[f64]| vec![0.5 * x[0], 2.0 * x[1]]);
        let traj = iterate(&map, &[0.0, 0.0], &[], 4).unwrap();
        assert_eq!(traj.len(), 5);
        assert!(traj.iter().all(|x| x == &vec![0.0, 0.0]));
    }

    #[test]
    fn iterate_reports_divergence_with_last_finite_iterate() {
        let map = FnMap::new(1, 0, |x: &[f64], _p: &[f64]| vec![x[0] * 1e200]);
        match iterate(&map, &[1e100], &[], 5) {
            Err(Error::Divergence { step, last }) => {
                assert_eq!(step, 2);
                assert_eq!(last, vec![1e300]);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn timestepper_config_validation() {
        let mut c = TimestepperConfig {
            micro_horizon: 0.1,
            reporting_horizon: 0.05,
            realizations: 1,
            master_seed: 0,
        };
        assert!(c.validate().is_err());
        c.reporting_horizon = 0.2;
        assert!(c.validate().is_ok());
        c.realizations = 0;
        assert!(c.validate().is_err());
    }

    /// Random-walk micro model: the coarse state is the mean of `width`
    /// Gaussian walkers.
    struct Walkers;
    impl MicroModel for Walkers {
        type State = Vec<f64>;
        fn evolve(&self, s: &mut Vec<f64>, _p: &[f64], h: f64, rng: &mut SimRng) -> Result<()> {
            for w in s.iter_mut() {
                let u: f64 = rng.random::<f64>() - 0.5;
                *w += u * h;
            }
            Ok(())
        }
    }
    struct LiftWalkers;
    impl LiftOp<Vec<f64>> for LiftWalkers {
        fn lift(&self, x: &[f64], rng: &mut SimRng) -> Result<Vec<f64>> {
            Ok((0..16).map(|_| x[0] + (rng.random::<f64>() - 0.5)).collect())
        }
    }
    struct MeanRestrict;
    impl RestrictOp<Vec<f64>> for MeanRestrict {
        fn coarse_dim(&self) -> usize {
            1
        }
        fn restrict(&self, s: &Vec<f64>) -> Vec<f64> {
            vec![s.iter().sum::<f64>() / s.len() as f64]
        }
    }

    fn walker_map(nr: usize, seed: u64) -> CoarseTimestepper<Walkers, LiftWalkers, MeanRestrict> {
        let cfg = TimestepperConfig {
            micro_horizon: 0.25,
            reporting_horizon: 1.0,
            realizations: nr,
            master_seed: seed,
        };
        make_coarse_timestepper(Walkers, LiftWalkers, MeanRestrict, cfg, 0).unwrap()
    }

    #[test]
    fn timestepper_is_seed_reproducible() {
        let a = walker_map(8, 42).evaluate(&[0.3], &[]).unwrap();
        let b = walker_map(8, 42).evaluate(&[0.3], &[]).unwrap();
        let c = walker_map(8, 43).evaluate(&[0.3], &[]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ensemble_noise_contracts_like_inverse_sqrt() {
        // standard error of the ensemble mean over N_r in {25, 100, 400}
        let se: Vec<f64> = [25usize, 100, 400]
            .iter()
            .map(|&nr| walker_map(nr, 7).evaluate_stats(&[0.0], &[]).unwrap().std_error[0])
            .collect();
        let slope = (se[2].ln() - se[0].ln()) / (400f64.ln() - 25f64.ln());
        assert!((slope + 0.5).abs() < 0.5 * 2f64.ln() / 16f64.ln() + 0.25, "slope {slope}");
        // each quadrupling should halve the error within a factor of 2
        for w in se.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 1.0 && ratio < 4.0, "ratio {ratio}");
        }
    }
}
