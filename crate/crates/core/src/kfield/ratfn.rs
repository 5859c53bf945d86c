//! The ordered field Q(K) of rational functions in the time parameter `K`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::Poly;
use super::KFieldError;

/// An element of Q(K), kept in canonical form.
///
/// Canonical form: numerator and denominator are coprime, the denominator is
/// monic (so its leading coefficient is positive), and zero is `0 / 1`. Two
/// values are equal exactly when their canonical forms are identical, so the
/// derived `Eq` and `Hash` are the field's equality.
///
/// `Ord` is the asymptotic order: `f < g` iff `f(k) < g(k)` for all
/// sufficiently large `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

/// Value of `lim_{K -> +inf} f(K)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Limit {
    Finite(BigRational),
    PosInfinity,
    NegInfinity,
}

impl RatFn {
    /// Builds `num / den` in canonical form.
    pub fn new(num: Poly, den: Poly) -> Result<Self, KFieldError> {
        if den.is_zero() {
            return Err(KFieldError::ZeroDenominator);
        }
        let g = num.gcd(&den);
        Ok(Self::from_coprime(num.div_exact(&g), den.div_exact(&g)))
    }

    /// Normalizes the denominator to be monic; caller guarantees coprimality.
    fn from_coprime(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let lc = den.leading_coeff().expect("nonzero denominator");
        if lc.is_one() {
            return RatFn { num, den };
        }
        let inv = lc.recip();
        RatFn { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(c.into()))
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    /// The indeterminate `K`.
    pub fn k() -> Self {
        Self::from_poly(Poly::from_ints(&[0, 1]))
    }

    /// `K + c`.
    pub fn k_plus(c: BigRational) -> Self {
        Self::from_poly(Poly::k_plus(c))
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// The polynomial itself when the denominator is 1.
    pub fn as_polynomial(&self) -> Option<&Poly> {
        self.is_polynomial().then_some(&self.num)
    }

    /// The rational constant when the value does not depend on `K`.
    pub fn as_constant(&self) -> Option<BigRational> {
        (self.den.is_one() && self.num.is_constant()).then(|| self.num.coeff(0))
    }

    pub fn recip(&self) -> Result<Self, KFieldError> {
        if self.is_zero() {
            return Err(KFieldError::DivisionByZero);
        }
        Ok(Self::from_coprime(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &RatFn) -> Result<Self, KFieldError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatFn { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Eventual sign of the value as `K -> +inf`.
    pub fn signum(&self) -> Ordering {
        // The denominator is monic, so only the numerator matters.
        match self.num.leading_coeff() {
            None => Ordering::Equal,
            Some(lc) if lc.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    /// Order of `self` against `other` for all sufficiently large `K`.
    pub fn compare_asymptotic(&self, other: &RatFn) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        (self - other).signum()
    }

    pub fn limit_at_infinity(&self) -> Limit {
        let (Some(dn), Some(dd)) = (self.num.degree(), self.den.degree()) else {
            return Limit::Finite(BigRational::zero());
        };
        match dn.cmp(&dd) {
            Ordering::Less => Limit::Finite(BigRational::zero()),
            Ordering::Equal => Limit::Finite(self.num.leading_coeff().unwrap() / self.den.leading_coeff().unwrap()),
            Ordering::Greater if self.signum() == Ordering::Greater => Limit::PosInfinity,
            Ordering::Greater => Limit::NegInfinity,
        }
    }

    /// Exact value at `K = k`.
    pub fn eval_at(&self, k: &BigRational) -> Result<BigRational, KFieldError> {
        let d = self.den.eval(k);
        if d.is_zero() {
            return Err(KFieldError::Pole(k.clone()));
        }
        Ok(self.num.eval(k) / d)
    }

    /// A rational `K0` such that for every `k > K0` the sign of `self(k)`
    /// equals `self.signum()` and `k` is not a pole.
    ///
    /// Uses the larger of the Cauchy root bounds of numerator and denominator.
    pub fn sign_threshold(&self) -> Result<BigRational, KFieldError> {
        let num_bound = self.num.cauchy_bound().ok_or(KFieldError::ZeroHasNoSign)?;
        let den_bound = self.den.cauchy_bound().expect("nonzero denominator");
        Ok(num_bound.max(den_bound))
    }

    /// Maximum polynomial degree of numerator and denominator.
    pub fn max_degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }
}

impl Default for RatFn {
    fn default() -> Self {
        Self::zero()
    }
}

impl Zero for RatFn {
    fn zero() -> Self {
        RatFn::zero()
    }
    fn is_zero(&self) -> bool {
        RatFn::is_zero(self)
    }
}

impl One for RatFn {
    fn one() -> Self {
        RatFn::one()
    }
}

impl From<Poly> for RatFn {
    fn from(p: Poly) -> Self {
        Self::from_poly(p)
    }
}

impl From<BigRational> for RatFn {
    fn from(c: BigRational) -> Self {
        Self::constant(c)
    }
}

impl PartialOrd for RatFn {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatFn {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare_asymptotic(other)
    }
}

fn add_impl(a: &RatFn, b: &RatFn, negate_b: bool) -> RatFn {
    let b_num = if negate_b { -&b.num } else { b.num.clone() };
    if a.is_zero() {
        return RatFn { num: b_num, den: b.den.clone() };
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.den == b.den {
        let num = &a.num + &b_num;
        if a.den.is_one() {
            return RatFn::from_poly(num);
        }
        let g = num.gcd(&a.den);
        return RatFn::from_coprime(num.div_exact(&g), a.den.div_exact(&g));
    }
    // Henrici: with g1 = gcd(b, d), the sum a/b + c/d reduces using only
    // gcd(t, g1) where t = a*(d/g1) + c*(b/g1).
    let g1 = a.den.gcd(&b.den);
    let a_cof = b.den.div_exact(&g1);
    let b_cof = a.den.div_exact(&g1);
    let t = &(&a.num * &a_cof) + &(&b_num * &b_cof);
    if t.is_zero() {
        return RatFn::zero();
    }
    if g1.is_one() {
        return RatFn::from_coprime(t, &a.den * &a_cof);
    }
    let g2 = t.gcd(&g1);
    let den = &b_cof * &b.den.div_exact(&g2);
    RatFn::from_coprime(t.div_exact(&g2), den)
}

fn mul_impl(a: &RatFn, b: &RatFn) -> RatFn {
    if a.is_zero() || b.is_zero() {
        return RatFn::zero();
    }
    if a.den.is_one() && b.den.is_one() {
        return RatFn::from_poly(&a.num * &b.num);
    }
    let g1 = a.num.gcd(&b.den);
    let g2 = b.num.gcd(&a.den);
    let num = &a.num.div_exact(&g1) * &b.num.div_exact(&g2);
    let den = &a.den.div_exact(&g2) * &b.den.div_exact(&g1);
    RatFn::from_coprime(num, den)
}

impl Add for &RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        add_impl(self, rhs, false)
    }
}

impl Sub for &RatFn {
    type Output = RatFn;
    fn sub(self, rhs: &RatFn) -> RatFn {
        add_impl(self, rhs, true)
    }
}

impl Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        mul_impl(self, rhs)
    }
}

impl Div for &RatFn {
    type Output = RatFn;
    /// Panics on division by zero; use [`RatFn::checked_div`] otherwise.
    fn div(self, rhs: &RatFn) -> RatFn {
        self.checked_div(rhs).expect("division by the zero element of Q(K)")
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RatFn {
            type Output = RatFn;
            fn $m(self, rhs: RatFn) -> RatFn {
                $tr::$m(&self, &rhs)
            }
        }
        impl $tr<&RatFn> for RatFn {
            type Output = RatFn;
            fn $m(self, rhs: &RatFn) -> RatFn {
                $tr::$m(&self, rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        -&self
    }
}

impl std::iter::Sum for RatFn {
    fn sum<I: Iterator<Item = RatFn>>(iter: I) -> RatFn {
        iter.fold(RatFn::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for RatFn {
    /// `(num)/(den)` with ascending coefficient lists, e.g.
    /// `(3 + 2K)/(1 + 1K)`; polynomials print without a denominator.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            if self.num.terms().count() <= 1 {
                return write!(f, "{}", self.num);
            }
            return write!(f, "({})", self.num);
        }
        write!(f, "({})/({})", self.num, self.den)
    }
}
