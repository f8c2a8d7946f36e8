use rand::Rng;

/// Accumulated hit probability against a pre-drawn uniform threshold.
///
/// Hits follow density semantics: the probability of a hit in `[t, t + dt)` is the hazard times
/// `dt`, so a trajectory whose accumulated probability ends at `C` hits with probability `C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trigger {
    threshold: f64,
    accumulated: f64,
}

impl Trigger {
    pub fn new(threshold: f64) -> Self {
        Trigger { threshold, accumulated: 0.0 }
    }

    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(rng.random::<f64>())
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn accumulated(&self) -> f64 {
        self.accumulated
    }

    /// Adds `increment` of probability spread over one step whose hazard varies linearly from
    /// `start_rate` to `end_rate`.
    ///
    /// Returns the fraction of the step, in `[0, 1]`, at which the threshold is first crossed.
    pub fn accumulate(&mut self, increment: f64, start_rate: f64, end_rate: f64) -> Option<f64> {
        let increment = increment.max(0.0);
        let before = self.accumulated;
        self.accumulated += increment;
        if self.threshold >= self.accumulated || self.threshold < before || increment == 0.0 {
            return None;
        }
        let need = self.threshold - before;
        let (a, b) = (start_rate.max(0.0), end_rate.max(0.0));
        if a + b <= 0.0 {
            return Some((need / increment).clamp(0.0, 1.0));
        }
        // rate(x) = k (a + (b - a) x) on x in [0, 1], scaled so it integrates to `increment`
        let k = increment / ((a + b) / 2.0);
        let p = k * a;
        let q = k * (b - a) / 2.0;
        let disc = (p * p + 4.0 * q * need).max(0.0);
        let x = 2.0 * need / (p + disc.sqrt());
        Some(if x.is_finite() { x.clamp(0.0, 1.0) } else { need / increment })
    }
}

/// Picks one of `candidates` with probability proportional to its positive net current.
///
/// `draw` is a uniform number in `[0, 1)`. Returns `None` when no candidate receives current.
pub fn choose_component(net_currents: &[f64], candidates: &[usize], draw: f64) -> Option<usize> {
    let total: f64 = candidates.iter().map(|&n| net_currents[n].max(0.0)).sum();
    if !(total > 0.0) {
        return None;
    }
    let target = draw * total;
    let mut acc = 0.0;
    let mut last = None;
    for &n in candidates {
        let w = net_currents[n].max(0.0);
        if w > 0.0 {
            acc += w;
            last = Some(n);
            if target < acc {
                return Some(n);
            }
        }
    }
    last
}
