//! Gillespie kinetic Monte Carlo of CO oxidation on a periodic square
//! lattice, with lifting from and restriction to coverages.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blackbox::{make_coarse_timestepper, sim_rng, CoarseTimestepper, LiftOp, MicroModel, RestrictOp, SimRng, TimestepperConfig};
use crate::error::{Error, Result};
use crate::models::meanfield::KmcParams;

/// Occupation of one lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Species {
    Empty = 0,
    /// CO.
    A = 1,
    /// O.
    B = 2,
    /// Inert.
    C = 3,
}

const ALL: [Species; 4] = [Species::Empty, Species::A, Species::B, Species::C];

/// How partners of the two-site events are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmcVariant {
    /// Any two eligible sites, regardless of position.
    #[default]
    WellMixed,
    /// Adjacent pairs only; a drawn site without an eligible neighbour is a
    /// null event.
    NearestNeighbor,
}

/// Periodic lattice with per-species site lists for O(1) sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    width: usize,
    height: usize,
    sites: Vec<Species>,
    /// Simulation clock.
    pub t: f64,
    members: [Vec<u32>; 4],
    /// Position of each site inside its species list.
    slot: Vec<u32>,
}

impl LatticeState {
    /// All-empty lattice.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::from_sites(width, height, vec![Species::Empty; width * height])
    }

    pub fn from_sites(width: usize, height: usize, sites: Vec<Species>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("lattice dimensions must be positive".into()));
        }
        if sites.len() != width * height {
            return Err(Error::Dimension { expected: width * height, got: sites.len() });
        }
        if width * height > u32::MAX as usize {
            return Err(Error::InvalidConfig("lattice too large".into()));
        }
        let mut members: [Vec<u32>; 4] = Default::default();
        let mut slot = vec![0u32; sites.len()];
        for (i, &s) in sites.iter().enumerate() {
            slot[i] = members[s as usize].len() as u32;
            members[s as usize].push(i as u32);
        }
        Ok(Self { width, height, sites, t: 0.0, members, slot })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Species] {
        &self.sites
    }

    pub fn get(&self, i: usize) -> Species {
        self.sites[i]
    }

    pub fn count(&self, s: Species) -> usize {
        self.members[s as usize].len()
    }

    /// Cached `[N_empty, N_A, N_B, N_C]`.
    pub fn counts(&self) -> [usize; 4] {
        ALL.map(|s| self.count(s))
    }

    /// True when the cached counts and lists agree with a full recount.
    pub fn is_consistent(&self) -> bool {
        let mut c = [0usize; 4];
        for &s in &self.sites {
            c[s as usize] += 1;
        }
        c == self.counts()
            && self.members.iter().enumerate().all(|(k, list)| {
                list.iter()
                    .enumerate()
                    .all(|(j, &i)| self.sites[i as usize] as usize == k && self.slot[i as usize] as usize == j)
            })
    }

    pub fn set(&mut self, i: usize, s: Species) {
        let old = self.sites[i];
        if old == s {
            return;
        }
        let list = &mut self.members[old as usize];
        let at = self.slot[i] as usize;
        let last = *list.last().expect("site is listed under its species");
        list.swap_remove(at);
        if last as usize != i {
            self.slot[last as usize] = at as u32;
        }
        self.slot[i] = self.members[s as usize].len() as u32;
        self.members[s as usize].push(i as u32);
        self.sites[i] = s;
    }

    /// Right, left, down, up neighbours with periodic wrap.
    pub fn neighbors(&self, i: usize) -> [usize; 4] {
        let (w, h) = (self.width, self.height);
        let (x, y) = (i % w, i / w);
        [
            y * w + (x + 1) % w,
            y * w + (x + w - 1) % w,
            ((y + 1) % h) * w + x,
            ((y + h - 1) % h) * w + x,
        ]
    }

    fn random_of(&self, s: Species, rng: &mut SimRng) -> Option<usize> {
        let list = &self.members[s as usize];
        if list.is_empty() {
            None
        } else {
            Some(list[rng.random_range(0..list.len())] as usize)
        }
    }

    /// A member of `s` other than `not`.
    fn random_other(&self, s: Species, not: usize, rng: &mut SimRng) -> Option<usize> {
        let list = &self.members[s as usize];
        if list.len() < 2 {
            return None;
        }
        let mut k = rng.random_range(0..list.len() - 1);
        if k >= self.slot[not] as usize {
            k += 1;
        }
        Some(list[k] as usize)
    }

    fn random_neighbor_of(&self, i: usize, s: Species, rng: &mut SimRng) -> Option<usize> {
        let mut eligible = [0usize; 4];
        let mut k = 0;
        for j in self.neighbors(i) {
            if self.sites[j] == s && j != i {
                eligible[k] = j;
                k += 1;
            }
        }
        if k == 0 {
            None
        } else {
            Some(eligible[rng.random_range(0..k)])
        }
    }

    /// Occupation fractions `(θ_A, θ_B, θ_C)`.
    pub fn coverages(&self) -> [f64; 3] {
        let n = self.len() as f64;
        [
            self.count(Species::A) as f64 / n,
            self.count(Species::B) as f64 / n,
            self.count(Species::C) as f64 / n,
        ]
    }
}

/// Propensities `[CO ads, CO des, O2 ads, reaction, inert ads, inert des]`.
pub fn propensities(state: &LatticeState, k: &KmcParams) -> [f64; 6] {
    let n = state.len() as f64;
    let [ne, na, nb, nc] = state.counts().map(|c| c as f64);
    [
        k.alpha * ne,
        k.gamma * na,
        k.beta * n * (ne / n) * (ne / n),
        4.0 * k.k_r * n * (na / n) * (nb / n),
        k.mu * ne,
        k.eta * nc,
    ]
}

fn apply_event(state: &mut LatticeState, event: usize, variant: KmcVariant, rng: &mut SimRng) {
    use Species::*;
    let single = |state: &mut LatticeState, from: Species, to: Species, rng: &mut SimRng| {
        if let Some(i) = state.random_of(from, rng) {
            state.set(i, to);
        }
    };
    match event {
        0 => single(state, Empty, A, rng),
        1 => single(state, A, Empty, rng),
        2 => {
            let Some(i) = state.random_of(Empty, rng) else { return };
            let j = match variant {
                KmcVariant::WellMixed => state.random_other(Empty, i, rng),
                KmcVariant::NearestNeighbor => state.random_neighbor_of(i, Empty, rng),
            };
            if let Some(j) = j {
                state.set(i, B);
                state.set(j, B);
            }
        }
        3 => {
            let Some(i) = state.random_of(A, rng) else { return };
            let j = match variant {
                KmcVariant::WellMixed => state.random_of(B, rng),
                KmcVariant::NearestNeighbor => state.random_neighbor_of(i, B, rng),
            };
            if let Some(j) = j {
                state.set(i, Empty);
                state.set(j, Empty);
            }
        }
        4 => single(state, Empty, C, rng),
        _ => single(state, C, Empty, rng),
    }
}

/// Advances the lattice by `horizon` time units.
///
/// A waiting time that would overshoot the horizon sets the clock to the
/// horizon without firing; by memorylessness this leaves the law of the
/// process unchanged.
pub fn evolve(state: &mut LatticeState, k: &KmcParams, variant: KmcVariant, horizon: f64, rng: &mut SimRng) -> Result<()> {
    k.validate()?;
    let t_end = state.t + horizon.max(0.0);
    let mut events: u64 = 0;
    loop {
        let a = propensities(state, k);
        let total: f64 = a.iter().sum();
        if total <= 0.0 {
            state.t = t_end;
            return Ok(());
        }
        let u: f64 = 1.0 - rng.random::<f64>();
        let tau = -u.ln() / total;
        if state.t + tau >= t_end {
            state.t = t_end;
            return Ok(());
        }
        state.t += tau;
        let mut r = rng.random::<f64>() * total;
        let mut event = a.len() - 1;
        for (i, &ai) in a.iter().enumerate() {
            if r < ai {
                event = i;
                break;
            }
            r -= ai;
        }
        // guard against rounding picking a channel with zero propensity
        while a[event] == 0.0 {
            event -= 1;
        }
        apply_event(state, event, variant, rng);
        events += 1;
        if cfg!(debug_assertions) && events % 10_000 == 0 {
            debug_assert!(state.is_consistent(), "site counts drifted after {events} events");
        }
    }
}

/// Runs the simulator from `state` until the clock reaches `t_end`.
pub fn gillespie_run(mut state: LatticeState, k: &KmcParams, variant: KmcVariant, t_end: f64, seed: u64) -> Result<LatticeState> {
    let mut rng = sim_rng(seed);
    let horizon = t_end - state.t;
    evolve(&mut state, k, variant, horizon, &mut rng)?;
    Ok(state)
}

/// How [`lift_with`] turns coverages into a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftMode {
    /// Every site draws its species independently with probabilities θ.
    #[default]
    Independent,
    /// Species counts fixed to `θ·N` with stochastic rounding, positions
    /// uniformly shuffled.
    ExactCount,
}

fn check_feasible(theta: &[f64]) -> Result<[f64; 3]> {
    if theta.len() != 3 {
        return Err(Error::Dimension { expected: 3, got: theta.len() });
    }
    let tol = 1e-12;
    if theta.iter().any(|v| !v.is_finite() || *v < -tol) || theta.iter().sum::<f64>() > 1.0 + tol {
        return Err(Error::InfeasibleState(format!(
            "coverages {theta:?} must be non-negative with sum at most 1"
        )));
    }
    Ok([theta[0].max(0.0), theta[1].max(0.0), theta[2].max(0.0)])
}

/// Lifts coverages to a lattice with the given mode.
pub fn lift_with(theta: &[f64], width: usize, height: usize, mode: LiftMode, rng: &mut SimRng) -> Result<LatticeState> {
    let th = check_feasible(theta)?;
    let n = width * height;
    let sites = match mode {
        LiftMode::Independent => {
            let c1 = th[0];
            let c2 = c1 + th[1];
            let c3 = c2 + th[2];
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    if u < c1 {
                        Species::A
                    } else if u < c2 {
                        Species::B
                    } else if u < c3 {
                        Species::C
                    } else {
                        Species::Empty
                    }
                })
                .collect()
        }
        LiftMode::ExactCount => {
            let mut counts = th.map(|v| {
                let x = v * n as f64;
                let base = x.floor();
                let up = rng.random::<f64>() < x - base;
                base as usize + usize::from(up)
            });
            let mut k = 2;
            while counts.iter().sum::<usize>() > n {
                if counts[k] > 0 {
                    counts[k] -= 1;
                }
                k = (k + 2) % 3;
            }
            let mut sites = Vec::with_capacity(n);
            for (s, &c) in [Species::A, Species::B, Species::C].iter().zip(&counts) {
                sites.extend(std::iter::repeat_n(*s, c));
            }
            sites.resize(n, Species::Empty);
            sites.shuffle(rng);
            sites
        }
    };
    LatticeState::from_sites(width, height, sites)
}

/// Independent-site lift seeded from `seed`.
pub fn lift(theta: &[f64], width: usize, height: usize, seed: u64) -> Result<LatticeState> {
    lift_with(theta, width, height, LiftMode::Independent, &mut sim_rng(seed))
}

/// Occupation fractions of the lattice.
pub fn restrict(state: &LatticeState) -> [f64; 3] {
    state.coverages()
}

/// Lattice simulator driven by the coarse timestepper; `p[0]` is `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmcMicro {
    pub params: KmcParams,
    pub variant: KmcVariant,
}

impl MicroModel for KmcMicro {
    type State = LatticeState;
    fn evolve(&self, state: &mut LatticeState, p: &[f64], horizon: f64, rng: &mut SimRng) -> Result<()> {
        let k = self.params.with_beta(p.first().copied().unwrap_or(self.params.beta));
        evolve(state, &k, self.variant, horizon, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmcLift {
    pub width: usize,
    pub height: usize,
    pub mode: LiftMode,
}

impl LiftOp<LatticeState> for KmcLift {
    fn lift(&self, x: &[f64], rng: &mut SimRng) -> Result<LatticeState> {
        lift_with(x, self.width, self.height, self.mode, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KmcRestrict;

impl RestrictOp<LatticeState> for KmcRestrict {
    fn coarse_dim(&self) -> usize {
        3
    }
    fn restrict(&self, state: &LatticeState) -> Vec<f64> {
        restrict(state).to_vec()
    }
}

pub type KmcTimestepper = CoarseTimestepper<KmcMicro, KmcLift, KmcRestrict>;

/// Ensemble-averaged kMC coarse map over coverages with parameter `β`.
pub fn kmc_timestepper(
    params: KmcParams,
    variant: KmcVariant,
    width: usize,
    height: usize,
    mode: LiftMode,
    config: TimestepperConfig,
) -> Result<KmcTimestepper> {
    params.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidConfig("lattice dimensions must be positive".into()));
    }
    make_coarse_timestepper(
        KmcMicro { params, variant },
        KmcLift { width, height, mode },
        KmcRestrict,
        config,
        1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_keeps_lists_consistent() {
        let mut s = LatticeState::new(4, 3).unwrap();
        let mut rng = sim_rng(1);
        for _ in 0..500 {
            let i = rng.random_range(0..12);
            let sp = ALL[rng.random_range(0..4)];
            s.set(i, sp);
            assert!(s.is_consistent());
        }
    }

    #[test]
    fn neighbors_wrap() {
        let s = LatticeState::new(4, 3).unwrap();
        assert_eq!(s.neighbors(0), [1, 3, 4, 8]);
        assert_eq!(s.neighbors(11), [8, 10, 3, 7]);
    }

    #[test]
    fn frozen_state_jumps_clock() {
        let k = KmcParams {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            k_r: 0.0,
            mu: 0.0,
            eta: 0.0,
        };
        let s = lift(&[0.2, 0.2, 0.2], 8, 8, 3).unwrap();
        let out = gillespie_run(s.clone(), &k, KmcVariant::WellMixed, 5.0, 9).unwrap();
        assert_eq!(out.sites(), s.sites());
        assert_eq!(out.t, 5.0);
    }

    #[test]
    fn lift_degenerate_cases() {
        let s = lift(&[0.0, 0.0, 0.0], 10, 10, 1).unwrap();
        assert_eq!(restrict(&s), [0.0, 0.0, 0.0]);
        let s = lift(&[1.0, 0.0, 0.0], 10, 10, 1).unwrap();
        assert_eq!(s.count(Species::A), 100);
        assert!(matches!(lift(&[0.6, 0.6, 0.0], 4, 4, 1), Err(Error::InfeasibleState(_))));
        assert!(matches!(lift(&[-0.1, 0.0, 0.0], 4, 4, 1), Err(Error::InfeasibleState(_))));
    }

    #[test]
    fn exact_count_lift_hits_counts() {
        let mut rng = sim_rng(5);
        let s = lift_with(&[0.25, 0.5, 0.25], 8, 8, LiftMode::ExactCount, &mut rng).unwrap();
        assert_eq!(s.counts(), [0, 16, 32, 16]);
        let s = lift_with(&[0.3, 0.3, 0.4], 7, 7, LiftMode::ExactCount, &mut rng).unwrap();
        assert!(s.counts().iter().sum::<usize>() == 49);
    }
}
