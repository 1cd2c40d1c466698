//! Upload-constrained K=3, N=2 scheme over single mod-5 symbols.
//!
//! Each database offers exactly three possible downloads; the six fixed
//! linear combinations are built so that for every valid pairing the two
//! undesired symbols align into one dimension, letting two equations recover
//! one desired symbol. One desired symbol per two downloaded: rate 1/2,
//! which is the best possible under a three-way upload constraint (below
//! the unconstrained 4/7 for these parameters).

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::model::SchemeParams;
use crate::protocol::{Scheme, SchemeError, Trial};
use crate::rng::{self, Stream};

/// Element of the prime field of order five.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct F5(u8);

impl F5 {
    pub fn new(value: u8) -> Self {
        Self(value % 5)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<F5> {
        // x^3 = x^{-1} in a field of order 5.
        (self.0 != 0).then(|| self * self * self)
    }

    pub fn all() -> impl Iterator<Item = F5> {
        (0..5).map(F5)
    }
}

impl Add for F5 {
    type Output = F5;
    fn add(self, rhs: F5) -> F5 {
        F5((self.0 + rhs.0) % 5)
    }
}

impl Sub for F5 {
    type Output = F5;
    fn sub(self, rhs: F5) -> F5 {
        F5((5 + self.0 - rhs.0) % 5)
    }
}

impl Mul for F5 {
    type Output = F5;
    fn mul(self, rhs: F5) -> F5 {
        F5(self.0 * rhs.0 % 5)
    }
}

impl Neg for F5 {
    type Output = F5;
    fn neg(self) -> F5 {
        F5((5 - self.0) % 5)
    }
}

/// Coefficient rows of the three possible downloads from database 1,
/// applied to (W1, W2, W3). Coefficients reduced mod 5.
pub const ENCODING_F: [[u8; 3]; 3] = [[1, 2, 1], [1, 4, 3], [3, 4, 1]];

/// Coefficient rows of the three possible downloads from database 2.
pub const ENCODING_G: [[u8; 3]; 3] = [[1, 4, 2], [3, 4, 3], [2, 4, 1]];

fn combine(row: &[u8; 3], store: &[F5; 3]) -> F5 {
    row.iter()
        .zip(store)
        .fold(F5::new(0), |acc, (&c, &w)| acc + F5::new(c) * w)
}

/// The six possible answers `(f1, f2, f3)` and `(g1, g2, g3)` for a store.
pub fn f5_scheme_answers(store: &[F5; 3]) -> ([F5; 3], [F5; 3]) {
    (
        std::array::from_fn(|j| combine(&ENCODING_F[j], store)),
        std::array::from_fn(|j| combine(&ENCODING_G[j], store)),
    )
}

/// Valid pairing rule: message `desired` (0-based) is recoverable from
/// `(f_j, g_j')` exactly when `j' == (j + desired) mod 3`.
pub fn pairing_is_valid(desired: usize, f_index: usize, g_index: usize) -> bool {
    desired < 3 && f_index < 3 && g_index < 3 && g_index == (f_index + desired) % 3
}

/// Elimination data for one (desired, f index) pairing: the alignment ratio
/// of the undesired columns and the inverse of the surviving desired
/// coefficient.
fn decode_table() -> &'static [[(F5, F5); 3]; 3] {
    static TABLE: OnceLock<[[(F5, F5); 3]; 3]> = OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|desired| {
            std::array::from_fn(|f_index| {
                let g_index = (f_index + desired) % 3;
                let f_row = ENCODING_F[f_index];
                let g_row = ENCODING_G[g_index];
                let undesired: Vec<usize> = (0..3).filter(|&m| m != desired).collect();
                // The 2x2 undesired submatrix must have rank 1: the g row is
                // a scalar multiple of the f row on those columns.
                let ratio = F5::new(g_row[undesired[0]])
                    * F5::new(f_row[undesired[0]])
                        .inverse()
                        .expect("encoding has no zero coefficients");
                assert_eq!(
                    F5::new(g_row[undesired[1]]),
                    ratio * F5::new(f_row[undesired[1]]),
                    "undesired columns of pairing (W{}, f{}, g{}) do not align",
                    desired + 1,
                    f_index + 1,
                    g_index + 1,
                );
                let survivor = F5::new(g_row[desired]) - ratio * F5::new(f_row[desired]);
                let inverse = survivor.inverse().expect(
                    "desired column must stay independent of the aligned direction",
                );
                (ratio, inverse)
            })
        })
    })
}

/// Recover the desired symbol from one valid `(f, g)` answer pair.
pub fn f5_decode(
    desired: usize,
    f_index: usize,
    g_index: usize,
    f_value: F5,
    g_value: F5,
) -> Result<F5, SchemeError> {
    if !pairing_is_valid(desired, f_index, g_index) {
        return Err(SchemeError::Unsupported {
            scheme: "f5-aligned",
            what: "this (desired, pairing) combination",
        });
    }
    let (ratio, inverse) = decode_table()[desired][f_index];
    Ok((g_value - ratio * f_value) * inverse)
}

pub struct F5Scheme;

impl F5Scheme {
    fn store_from_seed(seed: u64) -> [F5; 3] {
        use rand::Rng;
        let mut rng = rng::stream(seed, Stream::Messages);
        std::array::from_fn(|_| F5::new(rng.random_range(0..5)))
    }

    fn pairing_from_seed(seed: u64) -> usize {
        use rand::Rng;
        rng::stream(seed, Stream::Pairing).random_range(0..3)
    }
}

impl Scheme for F5Scheme {
    fn id(&self) -> &'static str {
        "f5-aligned"
    }

    fn params(&self) -> SchemeParams {
        SchemeParams {
            messages: 3,
            databases: 2,
        }
    }

    /// One field symbol per message.
    fn message_len(&self) -> usize {
        1
    }

    fn trial(&self, desired: usize, seed: u64) -> Result<Trial, SchemeError> {
        self.check_desired(desired)?;
        let store = Self::store_from_seed(seed);
        let f_index = Self::pairing_from_seed(seed);
        let g_index = (f_index + desired) % 3;
        let (f, g) = f5_scheme_answers(&store);
        let decoded = f5_decode(desired, f_index, g_index, f[f_index], g[g_index])?;
        let correct = decoded == store[desired];
        Ok(Trial {
            scheme: self.id(),
            params: self.params(),
            desired,
            seed,
            correct,
            first_mismatch: (!correct).then_some(0),
            desired_units: 1,
            downloaded_units: 2,
            // One choice byte per database.
            uploaded_bits: 16,
            transcript: None,
        })
    }

    fn sample_queries(&self, desired: usize, seed: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        self.check_desired(desired)?;
        let f_index = Self::pairing_from_seed(seed);
        let g_index = (f_index + desired) % 3;
        Ok(vec![vec![f_index as u8], vec![g_index as u8]])
    }

    fn randomness_atoms(&self) -> Option<u64> {
        Some(3)
    }

    fn queries_at_atom(&self, desired: usize, atom: u64) -> Result<Vec<Vec<u8>>, SchemeError> {
        self.check_desired(desired)?;
        if atom >= 3 {
            return Err(SchemeError::AtomOutOfRange { atom, atoms: 3 });
        }
        let f_index = atom as usize;
        let g_index = (f_index + desired) % 3;
        Ok(vec![vec![f_index as u8], vec![g_index as u8]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_stores() -> impl Iterator<Item = [F5; 3]> {
        (0..125u8).map(|i| [F5::new(i % 5), F5::new(i / 5 % 5), F5::new(i / 25)])
    }

    #[test]
    fn field_arithmetic() {
        assert_eq!(F5::new(3) + F5::new(4), F5::new(2));
        assert_eq!(F5::new(1) - F5::new(3), F5::new(3));
        assert_eq!(F5::new(3) * F5::new(4), F5::new(2));
        assert_eq!(-F5::new(2), F5::new(3));
        assert_eq!(F5::new(0).inverse(), None);
        for x in 1..5 {
            assert_eq!(F5::new(x) * F5::new(x).inverse().unwrap(), F5::new(1));
        }
    }

    #[test]
    fn zero_store_gives_zero_answers() {
        let (f, g) = f5_scheme_answers(&[F5::new(0); 3]);
        assert_eq!(f, [F5::new(0); 3]);
        assert_eq!(g, [F5::new(0); 3]);
    }

    #[test]
    fn unit_store_reads_first_coefficient_column() {
        let (f, g) = f5_scheme_answers(&[F5::new(1), F5::new(0), F5::new(0)]);
        assert_eq!(f, [F5::new(1), F5::new(1), F5::new(3)]);
        assert_eq!(g, [F5::new(1), F5::new(3), F5::new(2)]);
    }

    #[test]
    fn desired_alone_survives_any_pairing() {
        for w in F5::all() {
            let store = [w, F5::new(0), F5::new(0)];
            let (f, g) = f5_scheme_answers(&store);
            for f_index in 0..3 {
                assert_eq!(f5_decode(0, f_index, f_index, f[f_index], g[f_index]), Ok(w));
            }
        }
    }

    #[test]
    fn exhaustive_decode_all_pairings_all_stores() {
        // 3 desired x 3 pairings x 125 stores = 1125 cases.
        let mut cases = 0;
        for store in all_stores() {
            let (f, g) = f5_scheme_answers(&store);
            for desired in 0..3 {
                for f_index in 0..3 {
                    let g_index = (f_index + desired) % 3;
                    let decoded =
                        f5_decode(desired, f_index, g_index, f[f_index], g[g_index]).unwrap();
                    assert_eq!(decoded, store[desired]);
                    cases += 1;
                }
            }
        }
        assert_eq!(cases, 1125);
    }

    #[test]
    fn undesired_submatrices_have_rank_one() {
        for desired in 0..3usize {
            for f_index in 0..3usize {
                let g_index = (f_index + desired) % 3;
                let undesired: Vec<usize> = (0..3).filter(|&m| m != desired).collect();
                let a = F5::new(ENCODING_F[f_index][undesired[0]]);
                let b = F5::new(ENCODING_F[f_index][undesired[1]]);
                let c = F5::new(ENCODING_G[g_index][undesired[0]]);
                let d = F5::new(ENCODING_G[g_index][undesired[1]]);
                // Determinant zero: rank 1 (no row of the encoding is zero).
                assert_eq!(a * d - b * c, F5::new(0), "desired={desired} f={f_index}");
                // Desired column independent of the aligned direction.
                let ratio = c * a.inverse().unwrap();
                let fd = F5::new(ENCODING_F[f_index][desired]);
                let gd = F5::new(ENCODING_G[g_index][desired]);
                assert_ne!(gd - ratio * fd, F5::new(0));
            }
        }
    }

    #[test]
    fn invalid_pairing_is_rejected() {
        assert!(f5_decode(0, 0, 1, F5::new(0), F5::new(0)).is_err());
        assert!(f5_decode(1, 2, 2, F5::new(0), F5::new(0)).is_err());
        assert!(f5_decode(3, 0, 0, F5::new(0), F5::new(0)).is_err());
    }

    #[test]
    fn seeded_trials_decode_at_half_rate() {
        let scheme = F5Scheme;
        for desired in 0..3 {
            for seed in 0..30 {
                let trial = scheme.trial(desired, seed).unwrap();
                assert!(trial.correct);
                assert_eq!((trial.desired_units, trial.downloaded_units), (1, 2));
            }
        }
    }

    #[test]
    fn per_database_choice_is_uniform_for_every_desired() {
        let scheme = F5Scheme;
        for desired in 0..3 {
            for db in 0..2 {
                let mut seen: Vec<u8> = (0..3)
                    .map(|atom| scheme.queries_at_atom(desired, atom).unwrap()[db][0])
                    .collect();
                seen.sort_unstable();
                assert_eq!(seen, vec![0, 1, 2]);
            }
        }
    }
}
