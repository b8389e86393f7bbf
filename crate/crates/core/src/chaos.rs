//! Logistic-map iteration with the `[0.1, 0.9)` window filter used by both
//! the global and the per-block chaotic maps.

use crate::error::{Error, Result};

/// Control parameter of the logistic map.
pub const MU: f64 = 3.9999;

pub const WINDOW_LOW: f64 = 0.1;
pub const WINDOW_HIGH: f64 = 0.9;

/// Iterations allowed between two window states before the orbit is declared
/// degenerate.
pub const MAX_WINDOW_ITERATIONS: u32 = 1_000_000;

/// One logistic step, `MU * (x * (1 - x))`, in this exact evaluation order.
#[inline]
pub fn logistic_step(x: f64) -> f64 {
    let t1 = 1.0 - x;
    let t2 = x * t1;
    MU * t2
}

#[inline]
pub fn in_window(x: f64) -> bool {
    (WINDOW_LOW..WINDOW_HIGH).contains(&x)
}

/// Logistic-map iterator. The current state is never tested against the
/// window; only states produced by a step are.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChaoticStream {
    x: f64,
}

impl ChaoticStream {
    pub fn new(x0: f64) -> Self {
        ChaoticStream { x: x0 }
    }

    pub fn state(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn step(&mut self) -> f64 {
        self.x = logistic_step(self.x);
        self.x
    }

    /// Iterates until a state in `[0.1, 0.9)` appears and returns it.
    #[inline]
    pub fn next_window_state(&mut self) -> Result<f64> {
        for _ in 0..MAX_WINDOW_ITERATIONS {
            let x = self.step();
            if in_window(x) {
                return Ok(x);
            }
        }
        Err(Error::NonConvergence {
            state: self.x,
            iterations: MAX_WINDOW_ITERATIONS,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points_and_midpoint() {
        assert_eq!(logistic_step(0.0), 0.0);
        assert_eq!(logistic_step(1.0), 0.0);
        assert_eq!(logistic_step(0.5), 3.9999 * 0.25);
        assert_eq!(logistic_step(0.5), 0.999975);
    }

    #[test]
    fn in_window_state_returned_after_one_step() {
        // Pick x with logistic_step(x) inside the window.
        let x = 0.2;
        let expected = logistic_step(x);
        assert!(in_window(expected));
        let mut s = ChaoticStream::new(x);
        assert_eq!(s.next_window_state().unwrap(), expected);
        assert_eq!(s.state(), expected);
    }

    #[test]
    fn out_of_window_state_is_skipped() {
        let mut s = ChaoticStream::new(0.5);
        let first = logistic_step(0.5);
        assert!(!in_window(first));
        let y = s.next_window_state().unwrap();
        assert!(in_window(y));
        assert_ne!(y, first);
    }

    #[test]
    fn zero_state_never_converges() {
        let mut s = ChaoticStream::new(0.0);
        assert!(matches!(
            s.next_window_state(),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn window_boundaries_are_half_open() {
        assert!(in_window(0.1));
        assert!(!in_window(0.9));
        assert!(!in_window(0.0999999));
    }

    #[test]
    fn states_stay_in_unit_interval() {
        let mut s = ChaoticStream::new(0.123456789);
        for _ in 0..100_000 {
            let x = s.step();
            assert!((0.0..=1.0).contains(&x));
        }
    }
}
