//! Operation counters used to check receiver-side cost claims.
//!
//! Counting is per thread when `std` is available and process-wide
//! otherwise. Measure with [`measure`] on the thread that runs the code.

use core::ops::Sub;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// Modular exponentiations in the prime-order group.
    pub group_exps: u64,
    /// Modular multiplications in the prime-order group.
    pub group_muls: u64,
    /// Paillier encryptions, decryptions and homomorphic operations.
    pub ahe_ops: u64,
}

impl OpCounts {
    /// Operations that need public-key machinery.
    pub fn public_key_ops(&self) -> u64 {
        self.group_exps + self.ahe_ops
    }
}

impl Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            group_exps: self.group_exps - rhs.group_exps,
            group_muls: self.group_muls - rhs.group_muls,
            ahe_ops: self.ahe_ops - rhs.ahe_ops,
        }
    }
}

#[derive(Clone, Copy)]
enum Counter {
    Exp,
    Mul,
    Ahe,
}

#[cfg(any(test, feature = "std"))]
mod imp {
    use super::{Counter, OpCounts};
    use std::cell::Cell;

    std::thread_local! {
        static COUNTS: Cell<OpCounts> = const { Cell::new(OpCounts { group_exps: 0, group_muls: 0, ahe_ops: 0 }) };
    }

    pub(super) fn bump(counter: Counter) {
        COUNTS.with(|c| {
            let mut v = c.get();
            match counter {
                Counter::Exp => v.group_exps += 1,
                Counter::Mul => v.group_muls += 1,
                Counter::Ahe => v.ahe_ops += 1,
            }
            c.set(v);
        });
    }

    pub(super) fn snapshot() -> OpCounts {
        COUNTS.with(|c| c.get())
    }
}

#[cfg(not(any(test, feature = "std")))]
mod imp {
    use super::{Counter, OpCounts};
    use core::sync::atomic::{AtomicUsize, Ordering};

    static EXPS: AtomicUsize = AtomicUsize::new(0);
    static MULS: AtomicUsize = AtomicUsize::new(0);
    static AHE: AtomicUsize = AtomicUsize::new(0);

    pub(super) fn bump(counter: Counter) {
        let slot = match counter {
            Counter::Exp => &EXPS,
            Counter::Mul => &MULS,
            Counter::Ahe => &AHE,
        };
        slot.fetch_add(1, Ordering::Relaxed);
    }

    pub(super) fn snapshot() -> OpCounts {
        OpCounts {
            group_exps: EXPS.load(Ordering::Relaxed) as u64,
            group_muls: MULS.load(Ordering::Relaxed) as u64,
            ahe_ops: AHE.load(Ordering::Relaxed) as u64,
        }
    }
}

pub(crate) fn count_exp() {
    imp::bump(Counter::Exp);
}

pub(crate) fn count_mul() {
    imp::bump(Counter::Mul);
}

pub(crate) fn count_ahe() {
    imp::bump(Counter::Ahe);
}

pub fn snapshot() -> OpCounts {
    imp::snapshot()
}

/// Runs `f` and returns its result with the operations it performed.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}
