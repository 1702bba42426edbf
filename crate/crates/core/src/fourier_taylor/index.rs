use std::fmt;

use smallvec::SmallVec;

/// Exponents of the actions `p`.
pub type Powers = SmallVec<[u16; 4]>;
/// Integer wavevector multiplying the angles `q`.
pub type Wave = SmallVec<[i32; 4]>;

/// Index `(m, k)` of the monomial `p^m e^{i k·q}`.
///
/// Ordering is lexicographic on `m` then `k`, which fixes the iteration
/// order of every series and therefore the floating-point summation order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub m: Powers,
    pub k: Wave,
}

impl MultiIndex {
    pub fn new(m: &[u16], k: &[i32]) -> Self {
        assert_eq!(m.len(), k.len(), "power and wave vectors must share the dimension");
        Self {
            m: Powers::from_slice(m),
            k: Wave::from_slice(k),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            m: smallvec::smallvec![0; n],
            k: smallvec::smallvec![0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Total action degree `|m|`; the `P_l` grade of the monomial.
    pub fn degree(&self) -> u32 {
        self.m.iter().map(|&e| u32::from(e)).sum()
    }

    /// Fourier order `|k| = Σ |k_j|`.
    pub fn order(&self) -> u32 {
        self.k.iter().map(|&c| c.unsigned_abs()).sum()
    }

    pub fn is_average(&self) -> bool {
        self.k.iter().all(|&c| c == 0)
    }

    /// Index of the conjugate partner: same powers, negated wavevector.
    pub fn conjugate(&self) -> Self {
        Self {
            m: self.m.clone(),
            k: self.k.iter().map(|&c| -c).collect(),
        }
    }

    /// True when the first non-zero wave component is positive. Exactly one
    /// index of each `±k` pair is positive; `k = 0` is neither.
    pub fn is_positive_wave(&self) -> bool {
        self.k.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={:?}, k={:?})", self.m.as_slice(), self.k.as_slice())
    }
}

/// Formats a wavevector as `(k1, k2, ...)`.
pub fn format_wave(k: &[i32]) -> String {
    let parts: Vec<String> = k.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_and_order() {
        let idx = MultiIndex::new(&[2, 1], &[3, -4]);
        assert_eq!(idx.degree(), 3);
        assert_eq!(idx.order(), 7);
        assert!(idx.is_positive_wave());
        assert!(!idx.conjugate().is_positive_wave());
        assert!(!MultiIndex::zero(2).is_positive_wave());
        assert!(MultiIndex::zero(3).is_average());
    }

    #[test]
    fn wave_formatting() {
        assert_eq!(format_wave(&[1, -2]), "(1, -2)");
    }
}
