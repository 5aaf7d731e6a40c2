//! Exact arithmetic in ℤ[ζ_p] and ℤ[i].
//!
//! A [`CycInt`] over `Zeta(p)` stores `p` integer coefficients of
//! `1, ζ, …, ζ^(p-1)` reduced so the last one is zero; since
//! `1 + ζ + … + ζ^(p-1) = 0` is the only relation for prime `p`, equal values
//! have identical coefficient vectors. Over `Fourth` the coefficients are those
//! of `1, i`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycError {
    #[error("root mismatch: {0} vs {1}")]
    RootMismatch(Root, Root),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Which root of unity generates the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Root {
    /// A primitive p-th root of unity, p prime.
    Zeta(u32),
    /// The imaginary unit i.
    Fourth,
}

impl Root {
    /// Multiplicative order of the generator.
    pub fn order(self) -> u32 {
        match self {
            Root::Zeta(p) => p,
            Root::Fourth => 4,
        }
    }

    /// Characteristic of the phase space labelling frames with this root.
    pub fn characteristic(self) -> u32 {
        match self {
            Root::Zeta(p) => p,
            Root::Fourth => 2,
        }
    }

    /// Exponent multiplier turning a ℤ_p character value into a power of this root
    /// (`(-1)^k = i^(2k)`).
    pub fn character_scale(self) -> u32 {
        match self {
            Root::Zeta(_) => 1,
            Root::Fourth => 2,
        }
    }

    fn width(self) -> usize {
        match self {
            Root::Zeta(p) => p as usize,
            Root::Fourth => 2,
        }
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Root::Zeta(p) => write!(f, "zeta({p})"),
            Root::Fourth => write!(f, "i"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycInt {
    root: Root,
    coeffs: Vec<i64>,
}

impl CycInt {
    pub fn zero(root: Root) -> Self {
        CycInt { root, coeffs: vec![0; root.width()] }
    }

    pub fn from_int(root: Root, k: i64) -> Self {
        let mut z = Self::zero(root);
        z.coeffs[0] = k;
        z.canonicalize();
        z
    }

    /// Builds a value from raw coefficients and reduces it.
    pub fn from_coeffs(root: Root, coeffs: &[i64]) -> Result<Self, CycError> {
        if coeffs.len() != root.width() {
            return Err(CycError::LengthMismatch(root.width(), coeffs.len()));
        }
        let mut z = CycInt { root, coeffs: coeffs.to_vec() };
        z.canonicalize();
        Ok(z)
    }

    /// `root^e`.
    pub fn root_power(root: Root, e: i64) -> Self {
        let e = e.rem_euclid(root.order() as i64) as usize;
        let mut z = Self::zero(root);
        match root {
            Root::Zeta(_) => {
                if e == z.coeffs.len() - 1 {
                    // ζ^(p-1) = -(1 + ζ + … + ζ^(p-2))
                    z.coeffs.iter_mut().for_each(|c| *c = -1);
                    z.coeffs[e] = 0;
                } else {
                    z.coeffs[e] = 1;
                }
            }
            Root::Fourth => match e {
                0 => z.coeffs[0] = 1,
                1 => z.coeffs[1] = 1,
                2 => z.coeffs[0] = -1,
                _ => z.coeffs[1] = -1,
            },
        }
        z
    }

    /// Σₖ counts[k]·root^k for a histogram of exponents (length = root order).
    pub fn from_exponent_counts(root: Root, counts: &[i64]) -> Self {
        debug_assert_eq!(counts.len(), root.order() as usize);
        let mut z = Self::zero(root);
        match root {
            Root::Zeta(_) => z.coeffs.copy_from_slice(counts),
            Root::Fourth => {
                z.coeffs[0] = counts[0] - counts[2];
                z.coeffs[1] = counts[1] - counts[3];
            }
        }
        z.canonicalize();
        z
    }

    fn canonicalize(&mut self) {
        if let Root::Zeta(_) = self.root {
            let last = *self.coeffs.last().expect("nonempty");
            if last != 0 {
                self.coeffs.iter_mut().for_each(|c| *c -= last);
            }
        }
    }

    pub fn root(&self) -> Root {
        self.root
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The rational integer this value equals, if it is one.
    pub fn as_integer(&self) -> Option<i64> {
        self.coeffs[1..].iter().all(|&c| c == 0).then_some(self.coeffs[0])
    }

    fn check(&self, other: &CycInt) -> Result<(), CycError> {
        if self.root == other.root {
            Ok(())
        } else {
            Err(CycError::RootMismatch(self.root, other.root))
        }
    }

    pub fn add(&self, other: &CycInt) -> Result<CycInt, CycError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        let mut z = CycInt { root: self.root, coeffs };
        z.canonicalize();
        Ok(z)
    }

    pub fn sub(&self, other: &CycInt) -> Result<CycInt, CycError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        let mut z = CycInt { root: self.root, coeffs };
        z.canonicalize();
        Ok(z)
    }

    pub fn mul(&self, other: &CycInt) -> Result<CycInt, CycError> {
        self.check(other)?;
        let mut z = Self::zero(self.root);
        match self.root {
            Root::Zeta(p) => {
                let p = p as usize;
                let mut acc = vec![0i64; p];
                for (i, &a) in self.coeffs.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    for (j, &b) in other.coeffs.iter().enumerate() {
                        acc[(i + j) % p] += a * b;
                    }
                }
                z.coeffs = acc;
            }
            Root::Fourth => {
                let (a, b) = (self.coeffs[0], self.coeffs[1]);
                let (c, d) = (other.coeffs[0], other.coeffs[1]);
                z.coeffs = vec![a * c - b * d, a * d + b * c];
            }
        }
        z.canonicalize();
        Ok(z)
    }

    /// Complex conjugation: ζ ↦ ζ^(p-1), i ↦ -i.
    pub fn conj(&self) -> CycInt {
        let mut z = Self::zero(self.root);
        match self.root {
            Root::Zeta(p) => {
                let p = p as usize;
                for (i, &c) in self.coeffs.iter().enumerate() {
                    z.coeffs[(p - i) % p] += c;
                }
            }
            Root::Fourth => z.coeffs = vec![self.coeffs[0], -self.coeffs[1]],
        }
        z.canonicalize();
        z
    }

    /// `z · conj(z)`.
    pub fn squared_magnitude(&self) -> CycInt {
        self.mul(&self.conj()).expect("same root")
    }

    /// Whether `z · conj(z)` equals the rational integer `target`.
    pub fn squared_magnitude_is(&self, target: i64) -> bool {
        self.squared_magnitude() == CycInt::from_int(self.root, target)
    }
}

/// Σⱼ vⱼ · conj(wⱼ).
pub fn hermitian_inner(v: &[CycInt], w: &[CycInt]) -> Result<CycInt, CycError> {
    if v.len() != w.len() {
        return Err(CycError::LengthMismatch(v.len(), w.len()));
    }
    let Some(first) = v.first() else {
        return Err(CycError::LengthMismatch(0, 0));
    };
    let mut acc = CycInt::zero(first.root);
    for (a, b) in v.iter().zip(w) {
        a.check(b)?;
        acc = acc.add(&a.mul(&b.conj())?)?;
    }
    Ok(acc)
}

/// `z·conj(z)` for `z = Σₖ counts[k]·root^k` when that is a rational integer.
///
/// Works on the exponent histogram directly, without building `z`: over ℤ[ζ_p]
/// the product has coefficient `R_d = Σⱼ cⱼ c₍ⱼ₋d₎` on `ζ^d`, which is an integer
/// exactly when `R_1 = … = R_(p−1)`.
pub fn squared_magnitude_of_counts(root: Root, counts: &[i64]) -> Option<i64> {
    match root {
        Root::Fourth => {
            let x = counts[0] - counts[2];
            let y = counts[1] - counts[3];
            Some(x * x + y * y)
        }
        Root::Zeta(p) => {
            let p = p as usize;
            let r = |d: usize| -> i64 { (0..p).map(|j| counts[j] * counts[(j + p - d) % p]).sum() };
            let r1 = r(1);
            if (2..p).any(|d| r(d) != r1) {
                return None;
            }
            Some(r(0) - r1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Z3: Root = Root::Zeta(3);

    #[test]
    fn defining_relation_and_small_products() {
        let one = CycInt::root_power(Z3, 0);
        let z = CycInt::root_power(Z3, 1);
        let z2 = CycInt::root_power(Z3, 2);
        assert!(one.add(&z).unwrap().add(&z2).unwrap().is_zero());
        let a = one.add(&z).unwrap();
        assert_eq!(a.mul(&a.conj()).unwrap(), CycInt::from_int(Z3, 1));
        let i = CycInt::root_power(Root::Fourth, 1);
        assert_eq!(i.mul(&i).unwrap(), CycInt::from_int(Root::Fourth, -1));
    }

    #[test]
    fn root_powers() {
        assert_eq!(CycInt::root_power(Root::Zeta(5), 7), CycInt::root_power(Root::Zeta(5), 2));
        assert_eq!(CycInt::root_power(Root::Fourth, 2), CycInt::from_int(Root::Fourth, -1));
        assert_eq!(CycInt::root_power(Z3, 0), CycInt::from_int(Z3, 1));
        assert_eq!(CycInt::root_power(Root::Zeta(5), -1), CycInt::root_power(Root::Zeta(5), 4));
    }

    #[test]
    fn inner_products() {
        let v = [CycInt::root_power(Z3, 0), CycInt::root_power(Z3, 1)];
        assert_eq!(hermitian_inner(&v, &v).unwrap(), CycInt::from_int(Z3, 2));
        let f = Root::Fourth;
        let ones = [CycInt::from_int(f, 1), CycInt::from_int(f, 1)];
        let alt = [CycInt::from_int(f, 1), CycInt::from_int(f, -1)];
        assert!(hermitian_inner(&ones, &alt).unwrap().is_zero());
        let with_i = [CycInt::from_int(f, 1), CycInt::root_power(f, 1)];
        let z = hermitian_inner(&ones, &with_i).unwrap();
        assert_eq!(z.coeffs(), &[1, -1]);
        assert!(z.squared_magnitude_is(2));
        assert!(matches!(hermitian_inner(&ones, &v), Err(CycError::RootMismatch(..))));
        assert!(matches!(hermitian_inner(&ones[..1], &alt), Err(CycError::LengthMismatch(1, 2))));
    }

    #[test]
    fn squared_magnitudes() {
        assert!(CycInt::zero(Z3).squared_magnitude_is(0));
        let a = CycInt::root_power(Z3, 0).add(&CycInt::root_power(Z3, 1)).unwrap();
        assert!(a.squared_magnitude_is(1));
        // Quadratic Gauss sum over GF(3): ζ^0 + ζ^1 + ζ^4.
        let g = [0i64, 1, 4]
            .iter()
            .fold(CycInt::zero(Z3), |acc, &e| acc.add(&CycInt::root_power(Z3, e)).unwrap());
        assert!(g.squared_magnitude_is(3));
    }

    fn arb_cyc() -> impl Strategy<Value = CycInt> {
        prop_oneof![
            (prop::collection::vec(-50i64..50, 3)).prop_map(|c| CycInt::from_coeffs(Root::Zeta(3), &c).unwrap()),
            (prop::collection::vec(-50i64..50, 5)).prop_map(|c| CycInt::from_coeffs(Root::Zeta(5), &c).unwrap()),
            (prop::collection::vec(-50i64..50, 2)).prop_map(|c| CycInt::from_coeffs(Root::Fourth, &c).unwrap()),
        ]
    }

    fn arb_pair() -> impl Strategy<Value = (CycInt, CycInt)> {
        prop_oneof![
            (prop::collection::vec(-50i64..50, 5), prop::collection::vec(-50i64..50, 5)).prop_map(|(a, b)| (
                CycInt::from_coeffs(Root::Zeta(5), &a).unwrap(),
                CycInt::from_coeffs(Root::Zeta(5), &b).unwrap()
            )),
            (prop::collection::vec(-50i64..50, 2), prop::collection::vec(-50i64..50, 2)).prop_map(|(a, b)| (
                CycInt::from_coeffs(Root::Fourth, &a).unwrap(),
                CycInt::from_coeffs(Root::Fourth, &b).unwrap()
            )),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn histogram_magnitude_matches_ring((root, counts) in prop_oneof![
            prop::collection::vec(0i64..6, 3).prop_map(|c| (Z3, c)),
            prop::collection::vec(0i64..6, 5).prop_map(|c| (Root::Zeta(5), c)),
            prop::collection::vec(0i64..6, 2).prop_map(|c| (Root::Zeta(2), c)),
            prop::collection::vec(0i64..6, 4).prop_map(|c| (Root::Fourth, c)),
        ]) {
            let z = CycInt::from_exponent_counts(root, &counts);
            let m = z.squared_magnitude();
            match squared_magnitude_of_counts(root, &counts) {
                Some(k) => prop_assert_eq!(m, CycInt::from_int(root, k)),
                None => prop_assert!(m.as_integer().is_none()),
            }
        }

        #[test]
        fn self_difference_is_zero(a in arb_cyc()) {
            prop_assert!(a.sub(&a).unwrap().is_zero());
            prop_assert_eq!(a.conj().conj(), a);
        }

        #[test]
        fn conj_is_ring_homomorphism((a, b) in arb_pair()) {
            prop_assert_eq!(a.mul(&b).unwrap().conj(), a.conj().mul(&b.conj()).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().conj(), a.conj().add(&b.conj()).unwrap());
        }

        #[test]
        fn canonical_forms_are_unique(c in prop::collection::vec(-20i64..20, 3), shift in -20i64..20) {
            // Adding a multiple of 1 + ζ + ζ² never changes the value.
            let a = CycInt::from_coeffs(Z3, &c).unwrap();
            let shifted: Vec<i64> = c.iter().map(|x| x + shift).collect();
            prop_assert_eq!(CycInt::from_coeffs(Z3, &shifted).unwrap(), a);
        }
    }
}
