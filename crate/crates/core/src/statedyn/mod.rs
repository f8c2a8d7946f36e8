//! Labeled superpositions, their Schrödinger evolution and inter-component probability currents.
//!
//! Amplitudes `c_n` obey `i dc/dt = H c` with `H` in rad/s. The current flowing into
//! component `n` from component `m` is `J(n <- m) = 2 Im(conj(c_n) H(n,m) c_m)`, and the net
//! current `J_n = sum_m J(n <- m)` equals `d|c_n|^2/dt`.
//!
//! Reduced components stay in the list with amplitude zero so that indices are stable; they are
//! cut out of the effective matrix and contribute nothing to `s` or to currents.

mod label;
mod schedule;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

pub use label::{render_labels, BrainStatus, DetectorMode, Factor};
pub use schedule::{default_step, Coupling, HamiltonianSchedule, Matrix, Window};

use crate::error::{Error, Result};

/// One term of the superposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub amplitude: Complex64,
    pub labels: Vec<Factor>,
    /// Locally incoherent with the other components (environmental decoherence flag).
    pub incoherent: bool,
    pub birth_time: f64,
    /// Set once a boundary reduction has zeroed this component.
    pub reduced: bool,
}

impl Component {
    pub fn new(amplitude: Complex64, labels: Vec<Factor>) -> Self {
        Component { amplitude, labels, incoherent: false, birth_time: 0.0, reduced: false }
    }

    /// A zero-amplitude component, as created by a spawn event.
    pub fn empty(labels: Vec<Factor>) -> Self {
        Self::new(Complex64::new(0.0, 0.0), labels)
    }

    pub fn incoherent(mut self, flag: bool) -> Self {
        self.incoherent = flag;
        self
    }

    pub fn modulus(&self) -> f64 {
        self.amplitude.norm_sqr()
    }

    pub fn is_live(&self) -> bool {
        !self.reduced
    }

    pub fn has_ready(&self) -> bool {
        self.labels.iter().any(Factor::is_ready)
    }

    /// `(observer, state)` of every ready brain factor.
    pub fn ready_states(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.labels.iter().filter_map(|f| match f {
            Factor::Brain { observer, state, status: BrainStatus::Ready } => Some((*observer, *state)),
            _ => None,
        })
    }

    pub fn conscious_states(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.labels.iter().filter_map(|f| match f {
            Factor::Brain { observer, state, status: BrainStatus::Conscious } => Some((*observer, *state)),
            _ => None,
        })
    }

    pub fn render(&self) -> String {
        render_labels(&self.labels)
    }

    /// Rejects label lists with two brain factors for the same observer.
    pub fn check_labels(labels: &[Factor]) -> std::result::Result<(), String> {
        let mut seen = BTreeSet::new();
        for obs in labels.iter().filter_map(Factor::observer) {
            if !seen.insert(obs) {
                return Err(format!("observer {obs} has more than one brain factor"));
            }
        }
        Ok(())
    }
}

/// The full superposition at time `time`, with its square modulus `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub components: Vec<Component>,
    pub time: f64,
    s: f64,
}

impl SystemState {
    pub fn new(components: Vec<Component>, time: f64) -> Result<Self> {
        for (i, c) in components.iter().enumerate() {
            Component::check_labels(&c.labels).map_err(|m| Error::validation(format!("components[{i}].labels"), m))?;
        }
        let mut state = SystemState { components, time, s: 0.0 };
        state.refresh_s();
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Isolated-system square modulus as of the last refresh.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn refresh_s(&mut self) -> f64 {
        self.s = self.components.iter().filter(|c| c.is_live()).map(Component::modulus).sum();
        self.s
    }

    /// Sum of `|c_n|^2` over `subset`.
    pub fn square_modulus(&self, subset: &[usize]) -> Result<f64> {
        subset.iter().try_fold(0.0, |acc, &i| {
            let c = self.components.get(i).ok_or(Error::InvalidIndex { index: i, len: self.len() })?;
            Ok(acc + if c.is_live() { c.modulus() } else { 0.0 })
        })
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.components.iter().map(Component::modulus).collect()
    }

    pub fn live_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.iter().enumerate().filter(|(_, c)| c.is_live()).map(|(i, _)| i)
    }

    /// Observers conscious of more than one distinct brain state across live components.
    pub fn everett_violations(&self) -> Vec<(u32, Vec<u32>)> {
        let mut conscious: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        for c in self.components.iter().filter(|c| c.is_live()) {
            for (obs, st) in c.conscious_states() {
                conscious.entry(obs).or_default().insert(st);
            }
        }
        conscious
            .into_iter()
            .filter(|(_, states)| states.len() > 1)
            .map(|(obs, states)| (obs, states.into_iter().collect()))
            .collect()
    }

    pub fn check_everett(&self) -> Result<()> {
        match self.everett_violations().into_iter().next() {
            None => Ok(()),
            Some((observer, states)) => Err(Error::EverettViolation { time: self.time, observer, states }),
        }
    }
}

/// Effective matrix at the state's time: schedule entries (with masks) restricted to live components.
pub fn effective_matrix(state: &SystemState, sched: &HamiltonianSchedule) -> Result<Matrix> {
    let mut h = sched.matrix_at(state.time, state.len())?;
    for (i, c) in state.components.iter().enumerate() {
        if c.reduced {
            h.isolate(i);
        }
    }
    Ok(h)
}

/// Fixed-step RK4 integrator for `dc/dt = -i H c` with a frozen `H`.
#[derive(Debug)]
pub struct Propagator {
    h: Matrix,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Propagator {
    pub fn new(h: Matrix) -> Self {
        let n = h.dim();
        let z = vec![Complex64::new(0.0, 0.0); n];
        Propagator { h, k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    fn deriv(h: &Matrix, c: &[Complex64], out: &mut [Complex64]) {
        h.mul_vec(c, out);
        for o in out.iter_mut() {
            *o *= Complex64::new(0.0, -1.0);
        }
    }

    /// Advances `amps` by one RK4 step of length `dt`.
    pub fn step(&mut self, amps: &mut [Complex64], dt: f64) {
        let n = amps.len();
        debug_assert_eq!(n, self.h.dim());
        let [k1, k2, k3, k4] = &mut self.k;
        Self::deriv(&self.h, amps, k1);
        for i in 0..n {
            self.tmp[i] = amps[i] + k1[i] * (dt / 2.0);
        }
        Self::deriv(&self.h, &self.tmp, k2);
        for i in 0..n {
            self.tmp[i] = amps[i] + k2[i] * (dt / 2.0);
        }
        Self::deriv(&self.h, &self.tmp, k3);
        for i in 0..n {
            self.tmp[i] = amps[i] + k3[i] * dt;
        }
        Self::deriv(&self.h, &self.tmp, k4);
        for i in 0..n {
            amps[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }

    /// Steps the state's amplitudes and clock, then refreshes `s`.
    pub fn advance(&mut self, state: &mut SystemState, dt: f64) -> Result<()> {
        let mut amps: Vec<Complex64> = state.components.iter().map(|c| c.amplitude).collect();
        self.step(&mut amps, dt);
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Numerical { time: state.time, message: "non-finite amplitude".into() });
        }
        for (c, a) in state.components.iter_mut().zip(amps) {
            c.amplitude = a;
        }
        state.time += dt;
        state.refresh_s();
        Ok(())
    }
}

/// One RK4 step of length `dt` under the schedule's effective matrix at `state.time`.
pub fn evolve(state: &SystemState, sched: &HamiltonianSchedule, dt: f64) -> Result<SystemState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("step size must be positive, got {dt}")));
    }
    let mut next = state.clone();
    Propagator::new(effective_matrix(state, sched)?).advance(&mut next, dt)?;
    Ok(next)
}

/// Pairwise currents `J(n <- m)` in 1/s.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentMatrix {
    dim: usize,
    flows: Vec<f64>,
}

impl CurrentMatrix {
    pub fn from_matrix(state: &SystemState, h: &Matrix) -> Result<Self> {
        let dim = state.len();
        if h.dim() != dim {
            return Err(Error::Dimension { expected: dim, found: h.dim() });
        }
        let amps: Vec<Complex64> = state.components.iter().map(|c| c.amplitude).collect();
        let mut flows = vec![0.0; dim * dim];
        for n in 0..dim {
            for m in 0..dim {
                if n != m {
                    flows[n * dim + m] = 2.0 * (amps[n].conj() * h.get(n, m) * amps[m]).im;
                }
            }
        }
        Ok(CurrentMatrix { dim, flows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Current flowing into `n` out of `m`.
    pub fn flow(&self, n: usize, m: usize) -> f64 {
        self.flows[n * self.dim + m]
    }

    /// Net current into `n`.
    pub fn net_into(&self, n: usize) -> f64 {
        self.flows[n * self.dim..(n + 1) * self.dim].iter().sum()
    }

    pub fn net(&self) -> Vec<f64> {
        (0..self.dim).map(|n| self.net_into(n)).collect()
    }
}

/// Probability currents for `state` under `sched` at `state.time`.
pub fn current_matrix(state: &SystemState, sched: &HamiltonianSchedule) -> Result<CurrentMatrix> {
    let h = effective_matrix(state, sched)?;
    CurrentMatrix::from_matrix(state, &h)
}
