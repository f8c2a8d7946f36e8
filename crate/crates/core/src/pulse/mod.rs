//! Conscious pulses: dissolution of a chosen state over a resolution kernel, resolution-limited
//! partial reduction, drift toward lesser pain, and the PET occupancy-ratio model.
//!
//! The pulse coordinate `r` runs over `[0, 1]`; larger `r` means lesser pain.

mod pet;

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use statrs::function::erf::erf;

use crate::error::{Error, Result};

pub use pet::{pet_model, PetConfig, PetExperiment, PetRatios, PulseSetup, Species};

/// Gaussian resolution curve with `kernel(0) = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolutionKernel {
    width: f64,
}

impl ResolutionKernel {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Config(format!("kernel width must be positive, got {width}")));
        }
        Ok(ResolutionKernel { width })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn eval(&self, delta: f64) -> f64 {
        (-(delta * delta) / (2.0 * self.width * self.width)).exp()
    }

    /// Integral of the kernel centered at `center` over `[a, b]`.
    pub fn mass(&self, a: f64, b: f64, center: f64) -> f64 {
        let z = |x: f64| (x - center) / (SQRT_2 * self.width);
        self.width * (PI / 2.0).sqrt() * (erf(z(b)) - erf(z(a)))
    }
}

/// Square-modulus weights over equal bins of the pulse coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsciousPulse {
    weights: Vec<f64>,
    bin_width: f64,
}

impl ConsciousPulse {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Config("a pulse needs at least one bin".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("pulse weights must be finite and nonnegative".into()));
        }
        let bin_width = 1.0 / weights.len() as f64;
        Ok(ConsciousPulse { weights, bin_width })
    }

    pub fn uniform(bins: usize, total: f64) -> Result<Self> {
        Self::from_weights(vec![total / bins.max(1) as f64; bins])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn r_center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.bin_width
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean_r(&self) -> f64 {
        let total = self.total();
        if total == 0.0 {
            return 0.0;
        }
        // Distance below the top bin keeps full relative precision as the pulse piles up there.
        let top = self.weights.len() - 1;
        let deficit: f64 = self.weights.iter().enumerate().map(|(i, w)| w * (top - i) as f64 * self.bin_width).sum();
        self.r_center(top) - deficit / total
    }

    /// Weight outside the top (least painful) bin.
    pub fn weight_below_top(&self) -> f64 {
        self.weights[..self.weights.len() - 1].iter().sum()
    }
}

/// Dissolves a chosen state of square modulus `weight` into a pulse of `bins` bins whose shape is
/// the kernel centered at `center`, truncated to `[0, 1]` and rescaled to carry `weight`.
pub fn dissolve(weight: f64, kernel: &ResolutionKernel, center: f64, bins: usize) -> Result<ConsciousPulse> {
    if !(weight > 0.0) {
        return Err(Error::Config(format!("dissolved weight must be positive, got {weight}")));
    }
    if bins == 0 || !(0.0..=1.0).contains(&center) {
        return Err(Error::Config(format!("need bins > 0 and center in [0, 1], got {bins} and {center}")));
    }
    let bin_width = 1.0 / bins as f64;
    if kernel.width() < bin_width / 2.0 {
        return Err(Error::ResolutionUnderflow { width: kernel.width(), bin_width });
    }
    let masses: Vec<f64> =
        (0..bins).map(|i| kernel.mass(i as f64 * bin_width, (i + 1) as f64 * bin_width, center)).collect();
    let support: f64 = masses.iter().sum();
    ConsciousPulse::from_weights(masses.into_iter().map(|m| weight * m / support).collect())
}

/// Which of two eigen-components the observation picked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    First,
    Second,
}

/// Resolution-limited reduction of a two-component superposition whose eigenvalues differ by
/// `gap`: the chosen weight is kept, the other is multiplied by `kernel(gap)`.
pub fn partial_reduction(
    weights: (f64, f64),
    gap: f64,
    kernel: &ResolutionKernel,
    chosen: Branch,
) -> Result<(f64, f64)> {
    let (w1, w2) = weights;
    if !(w1 >= 0.0 && w2 >= 0.0) {
        return Err(Error::Config(format!("weights must be nonnegative, got ({w1}, {w2})")));
    }
    let overlap = kernel.eval(gap);
    Ok(match chosen {
        Branch::First => (w1, w2 * overlap),
        Branch::Second => (w1 * overlap, w2),
    })
}

fn check_rate(eta: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::Config(format!("drift rate must lie in [0, 0.5], got {eta}")));
    }
    Ok(())
}

/// Moves `eta` of each bin's weight to its less painful neighbour, in place.
pub fn drift_in_place(pulse: &mut ConsciousPulse, eta: f64) -> Result<()> {
    check_rate(eta)?;
    let w = &mut pulse.weights;
    let n = w.len();
    let mut carried = 0.0;
    for (i, wi) in w.iter_mut().enumerate() {
        let outgoing = if i + 1 < n { eta * *wi } else { 0.0 };
        *wi = (*wi - outgoing) + carried;
        carried = outgoing;
    }
    Ok(())
}

/// One drift step: for each adjacent pair, `eta * weight(i)` moves from bin `i` to bin `i + 1`.
pub fn drift_step(pulse: &ConsciousPulse, eta: f64) -> Result<ConsciousPulse> {
    let mut next = pulse.clone();
    drift_in_place(&mut next, eta)?;
    Ok(next)
}

/// Pulse snapshots taken every `cadence` drift steps, starting with step 0.
pub fn drift_history(
    pulse: &ConsciousPulse,
    eta: f64,
    steps: usize,
    cadence: usize,
) -> Result<Vec<(usize, ConsciousPulse)>> {
    check_rate(eta)?;
    let cadence = cadence.max(1);
    let mut current = pulse.clone();
    let mut out = vec![(0, current.clone())];
    for step in 1..=steps {
        drift_in_place(&mut current, eta)?;
        if step % cadence == 0 || step == steps {
            out.push((step, current.clone()));
        }
    }
    Ok(out)
}

/// Writes `step,bin,r_center,weight` rows.
pub fn write_pulse_csv<W: Write>(history: &[(usize, ConsciousPulse)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "bin", "r_center", "weight"])?;
    for (step, pulse) in history {
        for (bin, weight) in pulse.weights().iter().enumerate() {
            w.write_record([step.to_string(), bin.to_string(), pulse.r_center(bin).to_string(), weight.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson over `[a, b]`, independent of the erf route.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn kernel_shape() {
        let k = ResolutionKernel::gaussian(0.1).unwrap();
        assert_eq!(k.eval(0.0), 1.0);
        assert_eq!(k.eval(0.05), k.eval(-0.05));
        assert!(k.eval(0.2) < k.eval(0.1));
        assert!(ResolutionKernel::gaussian(0.0).is_err());
    }

    #[test]
    fn dissolve_symmetric_bell() {
        let bins = 21;
        let k = ResolutionKernel::gaussian(3.0 / bins as f64).unwrap();
        let p = dissolve(1.0, &k, 0.5, bins).unwrap();
        assert!((p.total() - 1.0).abs() < 1e-12);
        for i in 0..bins {
            assert!((p.weights()[i] - p.weights()[bins - 1 - i]).abs() < 1e-12);
        }
        assert!((p.mean_r() - 0.5).abs() < 1e-12);
        let p = dissolve(0.4, &k, 0.5, bins).unwrap();
        assert!((p.total() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn dissolve_at_edge_matches_quadrature() {
        let bins = 20;
        let k = ResolutionKernel::gaussian(0.15).unwrap();
        let p = dissolve(0.7, &k, 1.0, bins).unwrap();
        let f = |r: f64| (-(r - 1.0) * (r - 1.0) / (2.0 * 0.15 * 0.15)).exp();
        let support = simpson(f, 0.0, 1.0, 4000);
        for i in 0..bins {
            let (a, b) = (i as f64 / bins as f64, (i + 1) as f64 / bins as f64);
            let expected = 0.7 * simpson(f, a, b, 200) / support;
            assert!((p.weights()[i] - expected).abs() < 1e-10, "bin {i}");
        }
        assert!((p.total() - 0.7).abs() < 1e-12);
        assert!(p.weights()[bins - 1] > p.weights()[0]);
    }

    #[test]
    fn dissolve_errors() {
        let k = ResolutionKernel::gaussian(0.01).unwrap();
        assert!(matches!(dissolve(1.0, &k, 0.5, 20), Err(Error::ResolutionUnderflow { .. })));
        let k = ResolutionKernel::gaussian(0.1).unwrap();
        assert!(dissolve(0.0, &k, 0.5, 20).is_err());
        assert!(dissolve(1.0, &k, 1.5, 20).is_err());
    }

    #[test]
    fn partial_reduction_examples() {
        let w = 0.2;
        let k = ResolutionKernel::gaussian(w).unwrap();
        assert_eq!(partial_reduction((0.3, 0.7), 0.0, &k, Branch::First).unwrap(), (0.3, 0.7));
        let (a, b) = partial_reduction((0.5, 0.5), w, &k, Branch::First).unwrap();
        assert_eq!(a, 0.5);
        assert!((b - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
        let (a, b) = partial_reduction((0.5, 0.5), 10.0 * w, &k, Branch::Second).unwrap();
        assert!((a - 0.5 * (-50f64).exp()).abs() < 1e-30);
        assert_eq!(b, 0.5);
        assert!(partial_reduction((-0.1, 0.5), 0.0, &k, Branch::First).is_err());
    }

    #[test]
    fn drift_examples() {
        let p = ConsciousPulse::from_weights(vec![0.5, 0.5]).unwrap();
        let q = drift_step(&p, 0.1).unwrap();
        assert!((q.weights()[0] - 0.45).abs() < 1e-15);
        assert!((q.weights()[1] - 0.55).abs() < 1e-15);

        let top = ConsciousPulse::from_weights(vec![0.0, 0.0, 0.0, 0.8]).unwrap();
        assert_eq!(drift_step(&top, 0.3).unwrap(), top);

        assert!(drift_step(&p, 0.6).is_err());
        assert!(drift_step(&p, -0.1).is_err());
    }

    /// Oracle: iterate the transfer map written out as an explicit matrix-vector product.
    #[test]
    fn uniform_pulse_converges_to_top_bin() {
        let n = 10;
        let eta = 0.1;
        let mut v = vec![0.1; n];
        for _ in 0..1000 {
            let mut next = vec![0.0; n];
            for (i, x) in v.iter().enumerate() {
                if i + 1 < n {
                    next[i] += (1.0 - eta) * x;
                    next[i + 1] += eta * x;
                } else {
                    next[i] += x;
                }
            }
            v = next;
        }
        assert!(v[n - 1] > 0.99);

        let mut p = ConsciousPulse::uniform(n, 1.0).unwrap();
        for _ in 0..1000 {
            drift_in_place(&mut p, eta).unwrap();
        }
        for (a, b) in p.weights().iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(p.weights()[n - 1] > 0.99);
    }

    #[test]
    fn pulse_csv_columns() {
        let p = ConsciousPulse::from_weights(vec![0.25, 0.75]).unwrap();
        let hist = drift_history(&p, 0.1, 2, 1).unwrap();
        let mut buf = Vec::new();
        write_pulse_csv(&hist, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("step,bin,r_center,weight"));
        assert_eq!(lines.next(), Some("0,0,0.25,0.25"));
        assert_eq!(text.lines().count(), 1 + 3 * 2);
    }
}
