//! Small finite fields GF(p^e), e ≤ 3, with deterministic modulus and
//! generator selection.
//!
//! Elements are coefficient vectors over GF(p) in the monomial basis,
//! constant term first: [c₀, c₁, c₂] ↔ c₀ + c₁x + c₂x². The canonical order
//! used for every "smallest" choice is the integer encoding
//! c₀ + c₁·p + c₂·p², so modulus and generator selection are reproducible
//! byte for byte across platforms.
//!
//! The modulus is the smallest monic polynomial of degree e with no root in
//! GF(p); root-freeness certifies irreducibility exactly in degrees 2 and 3
//! (a reducible cubic or quadratic must have a linear factor). Degree 1 uses
//! the polynomial x, i.e. GF(p) itself. The generator is the smallest
//! element of full multiplicative order p^e − 1.
//!
//! [`Field`] is the arithmetic core; [`FieldTable`] adds the materialized
//! power table g⁰, g¹, …, g^{p^e−2} and is subject to a size budget.

use thiserror::Error;

/// Largest field order for which [`gf_build`] will materialize a power table.
pub const DEFAULT_TABLE_BUDGET: u64 = 10_000_000;

/// Largest supported characteristic.
pub const MAX_CHARACTERISTIC: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} exceeds the supported maximum {MAX_CHARACTERISTIC}")]
    CharacteristicTooLarge(u64),
    #[error("extension degree must be 1, 2, or 3 (got {0})")]
    UnsupportedDegree(u32),
    #[error("field order {order} exceeds the table budget {budget}")]
    OrderExceedsBudget { order: u64, budget: u64 },
    #[error("element has {len} coefficients, expected {expected}")]
    WrongElementLength { len: usize, expected: usize },
    #[error("coefficient {0} is not reduced modulo {1}")]
    UnreducedCoefficient(u64, u64),
    #[error("modulus must be monic of degree {0}")]
    BadModulus(u32),
    #[error("modulus has a root in GF({0}) and is therefore reducible")]
    ReducibleModulus(u64),
    #[error("the zero element has no multiplicative order")]
    ZeroElement,
}

/// Deterministic trial-division primality test (fine for p ≤ 10⁶).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    if n.is_multiple_of(3) {
        return n == 3;
    }
    let mut d = 5;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Internal fixed-width coefficient vector; coordinates ≥ e are zero.
type Coeffs = [u64; 3];

/// Arithmetic in GF(p^e) without a materialized power table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    p: u64,
    e: usize,
    /// Monic modulus, constant term first; length e+1 conceptually,
    /// stored padded.
    modulus: [u64; 4],
    /// x^e ≡ Σ fold[j]·x^j, i.e. fold[j] = −modulus[j] mod p.
    fold: [u64; 3],
    order: u64,
}

impl Field {
    /// Field with the canonical (smallest root-free) modulus.
    pub fn new(p: u64, e: u32) -> Result<Self, FieldError> {
        check_characteristic(p)?;
        if !(1..=3).contains(&e) {
            return Err(FieldError::UnsupportedDegree(e));
        }
        let modulus = choose_modulus(p, e as usize);
        Self::with_modulus(p, e, &modulus)
    }

    /// Field with a caller-supplied monic modulus (constant term first,
    /// length e+1). Root-freeness is enforced for e ≥ 2.
    pub fn with_modulus(p: u64, e: u32, modulus: &[u64]) -> Result<Self, FieldError> {
        check_characteristic(p)?;
        if !(1..=3).contains(&e) {
            return Err(FieldError::UnsupportedDegree(e));
        }
        let e = e as usize;
        if modulus.len() != e + 1 || modulus[e] != 1 {
            return Err(FieldError::BadModulus(e as u32));
        }
        for &c in modulus {
            if c >= p {
                return Err(FieldError::UnreducedCoefficient(c, p));
            }
        }
        if e >= 2 && has_root(p, &modulus[..e]) {
            return Err(FieldError::ReducibleModulus(p));
        }
        let mut stored = [0u64; 4];
        stored[..=e].copy_from_slice(modulus);
        let mut fold = [0u64; 3];
        for j in 0..e {
            fold[j] = (p - stored[j]) % p;
        }
        let order = p.pow(e as u32);
        Ok(Field {
            p,
            e,
            modulus: stored,
            fold,
            order,
        })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn extension_degree(&self) -> u32 {
        self.e as u32
    }

    /// p^e, the number of field elements.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// The monic modulus, constant term first, length e+1.
    pub fn modulus_polynomial(&self) -> Vec<u64> {
        self.modulus[..=self.e].to_vec()
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.e]
    }

    pub fn one(&self) -> Vec<u64> {
        let mut v = vec![0; self.e];
        v[0] = 1;
        v
    }

    /// Integer encoding c₀ + c₁p + c₂p² of a coefficient vector.
    pub fn encode(&self, x: &[u64]) -> Result<u64, FieldError> {
        let c = self.to_coeffs(x)?;
        Ok(self.encode_raw(c))
    }

    /// Inverse of [`encode`](Field::encode).
    pub fn decode(&self, mut v: u64) -> Vec<u64> {
        let mut out = vec![0; self.e];
        for slot in out.iter_mut() {
            *slot = v % self.p;
            v /= self.p;
        }
        out
    }

    fn encode_raw(&self, c: Coeffs) -> u64 {
        let mut v = 0;
        for i in (0..self.e).rev() {
            v = v * self.p + c[i];
        }
        v
    }

    fn to_coeffs(&self, x: &[u64]) -> Result<Coeffs, FieldError> {
        if x.len() != self.e {
            return Err(FieldError::WrongElementLength {
                len: x.len(),
                expected: self.e,
            });
        }
        let mut c = [0u64; 3];
        for (i, &v) in x.iter().enumerate() {
            if v >= self.p {
                return Err(FieldError::UnreducedCoefficient(v, self.p));
            }
            c[i] = v;
        }
        Ok(c)
    }

    fn coeffs_to_element(&self, c: Coeffs) -> Vec<u64> {
        c[..self.e].to_vec()
    }

    /// Product of two coefficient vectors: schoolbook multiply, then fold
    /// degrees ≥ e down through x^e ≡ −(modulus − x^e).
    pub fn mul(&self, x: &[u64], y: &[u64]) -> Result<Vec<u64>, FieldError> {
        let a = self.to_coeffs(x)?;
        let b = self.to_coeffs(y)?;
        Ok(self.coeffs_to_element(self.mul_raw(a, b)))
    }

    fn mul_raw(&self, a: Coeffs, b: Coeffs) -> Coeffs {
        let e = self.e;
        let p = self.p;
        let mut prod = [0u64; 5];
        for i in 0..e {
            if a[i] == 0 {
                continue;
            }
            for j in 0..e {
                prod[i + j] += a[i] * b[j] % p;
            }
        }
        if e > 1 {
            for deg in (e..=2 * e - 2).rev() {
                let t = prod[deg] % p;
                prod[deg] = 0;
                if t != 0 {
                    for j in 0..e {
                        prod[deg - e + j] += t * self.fold[j] % p;
                    }
                }
            }
        }
        let mut out = [0u64; 3];
        for i in 0..e {
            out[i] = prod[i] % p;
        }
        out
    }

    /// x^exp by square-and-multiply; x⁰ = 1 including for x = 0.
    pub fn pow(&self, x: &[u64], exp: u64) -> Result<Vec<u64>, FieldError> {
        let base = self.to_coeffs(x)?;
        Ok(self.coeffs_to_element(self.pow_raw(base, exp)))
    }

    fn pow_raw(&self, mut base: Coeffs, mut exp: u64) -> Coeffs {
        let mut acc = [0u64; 3];
        acc[0] = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, x: &[u64]) -> Result<u64, FieldError> {
        let c = self.to_coeffs(x)?;
        if c == [0, 0, 0] {
            return Err(FieldError::ZeroElement);
        }
        let one = {
            let mut o = [0u64; 3];
            o[0] = 1;
            o
        };
        let group = self.order - 1;
        let mut t = group;
        for q in distinct_prime_factors(group) {
            while t.is_multiple_of(q) && self.pow_raw(c, t / q) == one {
                t /= q;
            }
        }
        Ok(t)
    }

    /// Smallest element (by encoding) of full order p^e − 1.
    pub fn find_generator(&self) -> Vec<u64> {
        let group = self.order - 1;
        let one = {
            let mut o = [0u64; 3];
            o[0] = 1;
            o
        };
        let factors = distinct_prime_factors(group);
        for v in 1..self.order {
            let g = {
                let dec = self.decode(v);
                self.to_coeffs(&dec).expect("decoded element is reduced")
            };
            if factors.iter().all(|&q| self.pow_raw(g, group / q) != one) {
                return self.coeffs_to_element(g);
            }
        }
        unreachable!("every finite field has a primitive element")
    }

    /// Iterator over 1, b, b², … without per-step validation.
    pub fn successive_powers(&self, base: &[u64]) -> Result<Powers<'_>, FieldError> {
        let b = self.to_coeffs(base)?;
        let mut one = [0u64; 3];
        one[0] = 1;
        Ok(Powers {
            field: self,
            base: b,
            current: one,
        })
    }
}

/// Infinite iterator of successive powers of a fixed base element,
/// yielding fixed-width coefficient vectors starting from b⁰ = 1.
pub struct Powers<'a> {
    field: &'a Field,
    base: Coeffs,
    current: Coeffs,
}

impl Iterator for Powers<'_> {
    type Item = [u64; 3];

    fn next(&mut self) -> Option<[u64; 3]> {
        let out = self.current;
        self.current = self.field.mul_raw(self.current, self.base);
        Some(out)
    }
}

fn check_characteristic(p: u64) -> Result<(), FieldError> {
    if p > MAX_CHARACTERISTIC {
        return Err(FieldError::CharacteristicTooLarge(p));
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    Ok(())
}

/// Evaluates x^deg + Σ low[i]·x^i at every point of GF(p).
fn has_root(p: u64, low: &[u64]) -> bool {
    (0..p).any(|a| {
        // Horner on the monic polynomial x^deg + Σ low[i]·x^i.
        let mut acc = 1u64;
        for i in (0..low.len()).rev() {
            acc = (acc * a + low[i]) % p;
        }
        acc == 0
    })
}

/// Smallest monic root-free polynomial of degree e (degree 1: the
/// polynomial x).
fn choose_modulus(p: u64, e: usize) -> Vec<u64> {
    if e == 1 {
        return vec![0, 1];
    }
    let span = p.pow(e as u32);
    for v in 0..span {
        let mut low = vec![0u64; e];
        let mut t = v;
        for slot in low.iter_mut() {
            *slot = t % p;
            t /= p;
        }
        if !has_root(p, &low) {
            low.push(1);
            return low;
        }
    }
    unreachable!("irreducible polynomials of degree 2 and 3 exist over every GF(p)")
}

/// A field together with its generator and the full power table
/// g⁰, g¹, …, g^{p^e−2}, stored as integer encodings.
#[derive(Debug, Clone)]
pub struct FieldTable {
    field: Field,
    generator: Vec<u64>,
    power_table: Vec<u64>,
}

impl FieldTable {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// The canonical generator as a coefficient vector.
    pub fn generator(&self) -> &[u64] {
        &self.generator
    }

    /// Encoded elements g⁰, g¹, …, g^{order−2}; pairwise distinct and
    /// exhausting the nonzero elements.
    pub fn power_table(&self) -> &[u64] {
        &self.power_table
    }

    /// g^a as a coefficient vector.
    pub fn element(&self, a: u64) -> Vec<u64> {
        self.field.decode(self.power_table[a as usize])
    }
}

/// Builds GF(p^e) with the default table budget.
pub fn gf_build(p: u64, e: u32) -> Result<FieldTable, FieldError> {
    gf_build_with_budget(p, e, DEFAULT_TABLE_BUDGET)
}

/// Builds GF(p^e), failing when p^e exceeds `budget`. The power table is
/// checked to be a bijection onto the nonzero elements as it is built.
pub fn gf_build_with_budget(p: u64, e: u32, budget: u64) -> Result<FieldTable, FieldError> {
    let field = Field::new(p, e)?;
    if field.order() > budget {
        return Err(FieldError::OrderExceedsBudget {
            order: field.order(),
            budget,
        });
    }
    let generator = field.find_generator();
    let group = field.order() - 1;
    let mut power_table = Vec::with_capacity(group as usize);
    let mut seen = vec![false; field.order() as usize];
    for z in field
        .successive_powers(&generator)
        .expect("generator is a valid element")
        .take(group as usize)
    {
        let enc = field.encode_raw(z);
        assert!(
            !seen[enc as usize] && enc != 0,
            "power table must enumerate the nonzero elements exactly once"
        );
        seen[enc as usize] = true;
        power_table.push(enc);
    }
    Ok(FieldTable {
        field,
        generator,
        power_table,
    })
}

/// Product of two coefficient vectors in the table's field.
pub fn gf_mul(table: &FieldTable, x: &[u64], y: &[u64]) -> Result<Vec<u64>, FieldError> {
    table.field.mul(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prime_checks() {
        assert!(is_prime(2) && is_prime(3) && is_prime(101) && is_prime(293));
        assert!(!is_prime(0) && !is_prime(1) && !is_prime(4) && !is_prime(9991));
    }

    #[test]
    fn gf2_is_trivial() {
        let t = gf_build(2, 1).unwrap();
        assert_eq!(t.field().order(), 2);
        assert_eq!(t.generator(), &[1]);
        assert_eq!(t.power_table(), &[1]);
    }

    #[test]
    fn gf7_generator_and_powers() {
        // 2 has order 3 (2, 4, 1); 3 is the first primitive element.
        let t = gf_build(7, 1).unwrap();
        assert_eq!(t.generator(), &[3]);
        assert_eq!(t.power_table(), &[1, 3, 2, 6, 4, 5]);
        assert_eq!(gf_mul(&t, &[3], &[5]).unwrap(), vec![1]);
    }

    #[test]
    fn gf9_build() {
        let t = gf_build(3, 2).unwrap();
        assert_eq!(t.field().order(), 9);
        // Smallest root-free monic quadratic over GF(3) is x² + 1.
        assert_eq!(t.field().modulus_polynomial(), vec![1, 0, 1]);
        assert_eq!(t.field().multiplicative_order(t.generator()).unwrap(), 8);
        // Exhaustive: no smaller element has full order.
        let smaller_encodings = t.field().encode(t.generator()).unwrap();
        for v in 1..smaller_encodings {
            let x = t.field().decode(v);
            assert_ne!(t.field().multiplicative_order(&x).unwrap(), 8);
        }
    }

    #[test]
    fn reduction_with_explicit_modulus() {
        // GF(9) with modulus x² + x + 2 over GF(3): x·x = 2x + 1.
        let f = Field::with_modulus(3, 2, &[2, 1, 1]).unwrap();
        assert_eq!(f.mul(&[0, 1], &[0, 1]).unwrap(), vec![1, 2]);
        // Identity behaves.
        assert_eq!(f.mul(&[0, 1], &[1, 0]).unwrap(), vec![0, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(gf_build(6, 2).unwrap_err(), FieldError::NotPrime(6));
        assert_eq!(
            gf_build(5, 4).unwrap_err(),
            FieldError::UnsupportedDegree(4)
        );
        assert!(matches!(
            gf_build(2971, 3).unwrap_err(),
            FieldError::OrderExceedsBudget { .. }
        ));
        assert_eq!(
            Field::with_modulus(3, 2, &[0, 0, 1]).unwrap_err(),
            FieldError::ReducibleModulus(3)
        );
        let f = Field::new(7, 1).unwrap();
        assert_eq!(
            f.mul(&[9], &[1]).unwrap_err(),
            FieldError::UnreducedCoefficient(9, 7)
        );
        assert_eq!(
            f.mul(&[1, 2], &[1]).unwrap_err(),
            FieldError::WrongElementLength {
                len: 2,
                expected: 1
            }
        );
    }

    #[test]
    fn power_tables_are_bijections_on_small_fields() {
        for (p, e) in [
            (2, 1),
            (2, 2),
            (2, 3),
            (3, 2),
            (3, 3),
            (7, 3),
            (31, 2),
            (41, 3),
            (313, 2),
        ] {
            let t = gf_build(p, e).unwrap();
            let order = t.field().order();
            let mut seen = vec![false; order as usize];
            for &enc in t.power_table() {
                assert!(enc > 0 && enc < order);
                assert!(!seen[enc as usize], "GF({p}^{e}) table repeats an element");
                seen[enc as usize] = true;
            }
            assert_eq!(t.power_table().len() as u64, order - 1);
        }
    }

    #[test]
    fn randomized_algebra_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for (p, e) in [(3u64, 2u32), (5, 3), (101, 2), (13, 3)] {
            let t = gf_build(p, e).unwrap();
            let f = t.field();
            let group = f.order() - 1;
            for _ in 0..1000 {
                let x = f.decode(rng.gen_range(0..f.order()));
                let y = f.decode(rng.gen_range(0..f.order()));
                let z = f.decode(rng.gen_range(0..f.order()));
                let xy = f.mul(&x, &y).unwrap();
                let yx = f.mul(&y, &x).unwrap();
                assert_eq!(xy, yx);
                let xy_z = f.mul(&xy, &z).unwrap();
                let x_yz = f.mul(&x, &f.mul(&y, &z).unwrap()).unwrap();
                assert_eq!(xy_z, x_yz);
            }
            // Multiplication adds exponents in the power table.
            for _ in 0..1000 {
                let a = rng.gen_range(0..group);
                let b = rng.gen_range(0..group);
                let lhs = f
                    .encode(&gf_mul(&t, &t.element(a), &t.element(b)).unwrap())
                    .unwrap();
                let rhs = t.power_table()[((a + b) % group) as usize];
                assert_eq!(lhs, rhs);
            }
        }
    }
}
