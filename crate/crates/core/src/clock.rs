//! Time source used for per-solve timing in traces.

/// Monotonic clock returning seconds since an arbitrary origin.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero. Traces produced with it carry no timing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now(&self) -> f64 {
        (**self).now()
    }
}
