//! Arithmetic in `Z_d`, the lift `s: Z_d -> Z`, and an exhaustive check that
//! the quadratic phase exponents `s(j + x)^2 - s(j)^2` are injective in `j`
//! for every shift `x != 0`.

use crate::error::{CoherenceError, Result};

/// Largest modulus for which `s(j)^2` fits comfortably in an `i64`.
pub const MAX_MODULUS: u64 = 3_037_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ZdElement {
    modulus: u64,
    value: u64,
}

impl ZdElement {
    /// Reduces `value` modulo `modulus`.
    pub fn new(value: u64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(CoherenceError::InvalidParameter(
                "modulus must be positive".into(),
            ));
        }
        if modulus > MAX_MODULUS {
            return Err(CoherenceError::InvalidParameter(format!(
                "modulus {modulus} exceeds {MAX_MODULUS}"
            )));
        }
        Ok(ZdElement {
            modulus,
            value: value % modulus,
        })
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn value(self) -> u64 {
        self.value
    }

    /// The lift `s`: the representative in `{0, .., d-1}` viewed as an integer.
    pub fn lift(self) -> i64 {
        self.value as i64
    }
}

fn same_modulus(a: ZdElement, b: ZdElement) -> Result<()> {
    if a.modulus != b.modulus {
        return Err(CoherenceError::ModulusMismatch(a.modulus, b.modulus));
    }
    Ok(())
}

pub fn mod_add(a: ZdElement, b: ZdElement) -> Result<ZdElement> {
    same_modulus(a, b)?;
    Ok(ZdElement {
        modulus: a.modulus,
        value: (a.value + b.value) % a.modulus,
    })
}

pub fn mod_sub(a: ZdElement, b: ZdElement) -> Result<ZdElement> {
    same_modulus(a, b)?;
    Ok(ZdElement {
        modulus: a.modulus,
        value: (a.value + a.modulus - b.value) % a.modulus,
    })
}

/// `s(j + x)^2 - s(j)^2` evaluated in `Z`.
pub fn exponent(j: ZdElement, x: ZdElement) -> Result<i64> {
    let shifted = mod_add(j, x)?.lift();
    let base = j.lift();
    Ok(shifted * shifted - base * base)
}

/// Exponents `s(j + x)^2 - s(j)^2` for `j = 0 .. d-1`, without validation.
pub(crate) fn exponents_for_shift(d: usize, x: usize) -> Vec<i64> {
    (0..d)
        .map(|j| {
            let shifted = ((j + x) % d) as i64;
            let j = j as i64;
            shifted * shifted - j * j
        })
        .collect()
}

/// A triple `(x, i, j)` with `x != 0`, `i != j` and equal exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub x: u64,
    pub i: u64,
    pub j: u64,
}

/// Exhaustive search over all `(x, i, j)` for a collision of exponents.
pub fn find_counterexample(d: u64) -> Result<Option<Counterexample>> {
    if d < 2 {
        return Err(CoherenceError::InvalidParameter(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    if d > MAX_MODULUS {
        return Err(CoherenceError::InvalidParameter(format!(
            "dimension {d} exceeds {MAX_MODULUS}"
        )));
    }
    for x in 1..d {
        let e = exponents_for_shift(d as usize, x as usize);
        for i in 0..d as usize {
            for j in (i + 1)..d as usize {
                if e[i] == e[j] {
                    return Ok(Some(Counterexample {
                        x,
                        i: i as u64,
                        j: j as u64,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// True iff no shift `x != 0` produces two equal exponents.
pub fn proposition_holds(d: u64) -> Result<bool> {
    Ok(find_counterexample(d)?.is_none())
}
