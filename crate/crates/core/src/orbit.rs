//! Orders, orbits and discrete logarithms in the multiplicative semigroup of
//! matrices. Everything here is meant for small instances.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matrix::MatrixGR;

/// `A^tail = A^(tail + period)` with both values minimal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub tail: u64,
    pub period: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitResult {
    pub orbit: Option<Orbit>,
    pub budget_exhausted: bool,
    pub multiplications: u64,
}

/// Smallest `t` in `1..=cap` with `A^t = I`, using constant memory.
pub fn order_of_invertible(a: &MatrixGR, cap: u64) -> Option<u64> {
    let mut x = a.clone();
    for t in 1..=cap {
        if x.is_identity() {
            return Some(t);
        }
        if t < cap {
            x = &x * a;
        }
    }
    None
}

struct Stepper<'a> {
    base: &'a MatrixGR,
    budget: u64,
    used: u64,
}

impl Stepper<'_> {
    fn step(&mut self, x: &MatrixGR) -> Option<MatrixGR> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        Some(x * self.base)
    }
}

/// Floyd cycle detection on `A, A², A³, …`, spending at most `budget`
/// matrix products.
pub fn orbit_detect(a: &MatrixGR, budget: u64) -> OrbitResult {
    let mut s = Stepper {
        base: a,
        budget,
        used: 0,
    };
    let exhausted = |s: &Stepper| OrbitResult {
        orbit: None,
        budget_exhausted: true,
        multiplications: s.used,
    };

    // Sequence index j holds A^(j+1).
    let Some(mut tortoise) = s.step(a) else {
        return exhausted(&s);
    };
    let Some(mut hare) = s.step(&tortoise) else {
        return exhausted(&s);
    };
    while tortoise != hare {
        let (Some(t), Some(h1)) = (s.step(&tortoise), s.step(&hare)) else {
            return exhausted(&s);
        };
        let Some(h2) = s.step(&h1) else {
            return exhausted(&s);
        };
        tortoise = t;
        hare = h2;
    }

    let mut mu = 0u64;
    tortoise = a.clone();
    while tortoise != hare {
        let (Some(t), Some(h)) = (s.step(&tortoise), s.step(&hare)) else {
            return exhausted(&s);
        };
        tortoise = t;
        hare = h;
        mu += 1;
    }

    let mut period = 1u64;
    let Some(mut hare) = s.step(&tortoise) else {
        return exhausted(&s);
    };
    while tortoise != hare {
        let Some(h) = s.step(&hare) else {
            return exhausted(&s);
        };
        hare = h;
        period += 1;
    }

    OrbitResult {
        orbit: Some(Orbit {
            tail: mu + 1,
            period,
        }),
        budget_exhausted: false,
        multiplications: s.used,
    }
}

/// Reference orbit computation that stores every power; `limit` bounds the
/// number of powers kept.
pub fn orbit_by_table(a: &MatrixGR, limit: u64) -> Option<Orbit> {
    let mut seen: HashMap<Vec<u8>, u64> = HashMap::new();
    let mut x = a.clone();
    for i in 1..=limit {
        if let Some(&first) = seen.get(&x.encode()) {
            return Some(Orbit {
                tail: first,
                period: i - first,
            });
        }
        seen.insert(x.encode(), i);
        x = &x * a;
    }
    None
}

/// Smallest `x` in `0..=bound` with `M^x = A`, by trying each power in turn.
pub fn brute_dlog(m: &MatrixGR, a: &MatrixGR, bound: u64) -> Option<u64> {
    let mut x = MatrixGR::identity(m.context(), m.dim());
    for e in 0..=bound {
        if x == *a {
            return Some(e);
        }
        if e < bound {
            x = &x * m;
        }
    }
    None
}

/// Default cap on stored baby steps.
pub const DEFAULT_BSGS_ENTRIES: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BsgsOutcome {
    pub exponent: Option<u64>,
    pub entries_stored: u64,
    pub multiplications: u64,
}

fn ceil_sqrt(n: u64) -> u64 {
    let mut s = (n as f64).sqrt() as u64;
    while s * s < n {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    s
}

/// Baby-step giant-step for `M^x = A` with `0 <= x <= n`.
///
/// Stores `A·M^i` for `i = 0..=s` with `s = ceil(sqrt n)`, then walks
/// `M^(js)` for `j = 0..=ceil(n/s)`. Every hit `x = js - i` is checked by
/// recomputing `M^x`, since `M` need not be invertible.
pub fn bsgs_solve(m: &MatrixGR, a: &MatrixGR, n: u64, max_entries: u64) -> Result<BsgsOutcome> {
    m.check_compatible(a)?;
    if n == 0 {
        return Err(Error::Unsupported("search bound must be at least 1".into()));
    }
    let s = ceil_sqrt(n);
    let t = n.div_ceil(s);
    let needed = s + 1;
    if needed > max_entries {
        return Err(Error::MemoryBudget {
            needed,
            cap: max_entries,
        });
    }

    let mut multiplications = 0u64;
    let mut baby: HashMap<Vec<u8>, Vec<u64>> = HashMap::with_capacity(needed as usize);
    let mut y = a.clone();
    for i in 0..=s {
        baby.entry(y.encode()).or_default().push(i);
        if i < s {
            y = &y * m;
            multiplications += 1;
        }
    }

    let (giant, count) = m.pow_counted(&Exponent::from(s));
    multiplications += count;
    let mut z = MatrixGR::identity(m.context(), m.dim());
    for j in 0..=t {
        if let Some(hits) = baby.get(&z.encode()) {
            let mut best: Option<u64> = None;
            for &i in hits {
                let Some(x) = (j * s).checked_sub(i) else {
                    continue;
                };
                if x > n || best.is_some_and(|b| b <= x) {
                    continue;
                }
                let (check, count) = m.pow_counted(&Exponent::from(x));
                multiplications += count;
                if check == *a {
                    best = Some(x);
                }
            }
            if best.is_some() {
                return Ok(BsgsOutcome {
                    exponent: best,
                    entries_stored: needed,
                    multiplications,
                });
            }
        }
        if j < t {
            z = &z * &giant;
            multiplications += 1;
        }
    }
    Ok(BsgsOutcome {
        exponent: None,
        entries_stored: needed,
        multiplications,
    })
}
