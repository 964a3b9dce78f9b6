use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

/// Exact non-negative rational used for the scaling variable `S`.
///
/// Every candidate value of `S` has the form `n * r / D`, so keeping it as a
/// fraction lets feasibility be decided with integer arithmetic only.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    num: u128,
    den: u128,
}

impl Scale {
    pub const ZERO: Scale = Scale { num: 0, den: 1 };
    pub const ONE: Scale = Scale { num: 1, den: 1 };

    pub fn new(num: u128, den: u128) -> Self {
        assert!(den > 0, "scale denominator must be positive");
        let g = gcd(num, den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    /// `slots * rate / demand`: the largest scale `slots` slots can serve.
    pub fn from_slots(slots: u64, rate: u64, demand: u64) -> Self {
        Self::new(u128::from(slots) * u128::from(rate), u128::from(demand))
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn min(self, other: Scale) -> Scale {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `ceil(S * demand / rate)`: slots needed to serve `S` of `demand`.
    pub fn slots_for(&self, demand: u64, rate: u64) -> u64 {
        let top = self.num * u128::from(demand);
        let bottom = self.den * u128::from(rate);
        top.div_ceil(bottom) as u64
    }

    /// Whether `slots * rate >= S * demand` holds exactly.
    pub fn served_by(&self, slots: u64, rate: u64, demand: u64) -> bool {
        u128::from(slots) * u128::from(rate) * self.den >= self.num * u128::from(demand)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

impl PartialEq for Scale {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scale {}

impl PartialOrd for Scale {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scale {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Scale {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}
