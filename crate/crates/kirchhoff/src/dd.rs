//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! carrying about 106 bits of significand.
//!
//! Used where the horseshoe targeting needs more resolution than `f64`
//! provides. Transcendentals are accurate to a few units of 1e-32.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[allow(clippy::excessive_precision)]
impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self { hi: std::f64::consts::PI, lo: 1.224646799147353207e-16 };
    pub const TAU: Self = Self { hi: std::f64::consts::TAU, lo: 2.449293598294706414e-16 };
    pub const FRAC_PI_2: Self = Self { hi: std::f64::consts::FRAC_PI_2, lo: 6.123233995736766036e-17 };
    pub const E: Self = Self { hi: std::f64::consts::E, lo: 1.445646891729250158e-16 };
    pub const LN_2: Self = Self { hi: std::f64::consts::LN_2, lo: 2.319046813846299558e-17 };
    pub const LN_10: Self = Self { hi: std::f64::consts::LN_10, lo: -2.170756223382249351e-16 };
    pub const SQRT_2: Self = Self { hi: std::f64::consts::SQRT_2, lo: -9.667293313452913451e-17 };
    /// 2^-104
    pub const EPSILON: Self = Self { hi: 4.930380657631323784e-32, lo: 0.0 };

    /// Builds from two parts, renormalizing.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    #[inline]
    pub const fn c(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn sqr(self) -> Self {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = e + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (h, l) = quick_two_sum(p, e);
        Self { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (h, l) = quick_two_sum(p, e);
        Self { hi: h, lo: l }
    }

    fn ldexp(self, n: i32) -> Self {
        let s = 2f64.powi(n);
        Self { hi: self.hi * s, lo: self.lo * s }
    }

    fn nint(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            let mut lo = self.lo.round();
            if (lo - self.lo).abs() == 0.5 {
                // tie: away from zero on the combined value
                lo = if hi > 0.0 { self.lo.ceil() } else { self.lo.floor() };
            }
            Self::new(hi, lo)
        } else if (hi - self.hi).abs() == 0.5 && self.lo != 0.0 {
            let hi = if self.lo > 0.0 { self.hi.ceil() } else { self.hi.floor() };
            Self { hi, lo: 0.0 }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    /// Taylor sums for |t| <= pi/4.
    fn sin_cos_taylor(t: Self) -> (Self, Self) {
        if t.is_zero() {
            return (Self::ZERO, Self::ONE);
        }
        let t2 = -t.sqr();
        let thresh = Self::EPSILON.hi * 0.5;
        let mut s = t;
        let mut term = t;
        let mut k = 1.0;
        loop {
            term = term * t2 / Self::c((k + 1.0) * (k + 2.0));
            s += term;
            k += 2.0;
            if term.hi.abs() < thresh * s.hi.abs().max(1e-300) {
                break;
            }
        }
        let mut c = Self::ONE;
        let mut term = Self::ONE;
        let mut k = 0.0;
        loop {
            term = term * t2 / Self::c((k + 1.0) * (k + 2.0));
            c += term;
            k += 2.0;
            if term.hi.abs() < thresh {
                break;
            }
        }
        (s, c)
    }

    fn sin_cos_dd(self) -> (Self, Self) {
        if !self.is_finite() {
            return (Self::nan(), Self::nan());
        }
        let z = (self / Self::TAU).nint();
        let r = self - Self::TAU * z;
        let j = (r / Self::FRAC_PI_2).nint();
        let t = r - Self::FRAC_PI_2 * j;
        let (s, c) = Self::sin_cos_taylor(t);
        match j.hi as i64 {
            0 => (s, c),
            1 => (c, -s),
            -1 => (-c, s),
            _ => (-s, -c),
        }
    }

    fn exp_dd(self) -> Self {
        if self.hi > 709.0 {
            return Self::infinity();
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        if self.is_zero() {
            return Self::ONE;
        }
        let m = (self.hi / Self::LN_2.hi + 0.5).floor();
        let r = (self - Self::LN_2.mul_f64(m)).ldexp(-9);
        let mut s = r;
        let mut term = r;
        let mut k = 2.0;
        loop {
            term = term * r / Self::c(k);
            s += term;
            k += 1.0;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..9 {
            s = s.ldexp(1) + s.sqr();
        }
        (s + Self::ONE).ldexp(m as i32)
    }

    fn expm1_small(self) -> Self {
        let mut s = self;
        let mut term = self;
        let mut k = 2.0;
        loop {
            term = term * self / Self::c(k);
            s += term;
            k += 1.0;
            if term.hi.abs() <= Self::EPSILON.hi * 0.25 * s.hi.abs() {
                break;
            }
        }
        s
    }

    fn ln_dd(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::neg_infinity() } else { Self::nan() };
        }
        if self.is_infinite() {
            return self;
        }
        let x = Self::c(self.hi.ln());
        let x = x + self * (-x).exp_dd() - Self::ONE;
        x + self * (-x).exp_dd() - Self::ONE
    }

    fn sinh_small(self) -> Self {
        let t2 = self.sqr();
        let mut s = self;
        let mut term = self;
        let mut k = 1.0;
        loop {
            term = term * t2 / Self::c((k + 1.0) * (k + 2.0));
            s += term;
            k += 2.0;
            if term.hi.abs() <= Self::EPSILON.hi * 0.25 * s.hi.abs() {
                break;
            }
        }
        s
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl From<f32> for DoubleDouble {
    fn from(x: f32) -> Self {
        Self { hi: x as f64, lo: 0.0 }
    }
}

impl From<i32> for DoubleDouble {
    fn from(x: i32) -> Self {
        Self { hi: x as f64, lo: 0.0 }
    }
}

impl From<i64> for DoubleDouble {
    fn from(x: i64) -> Self {
        let hi = x as f64;
        let lo = (x - hi as i64) as f64;
        Self::new(hi, lo)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self::c(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + Self::c(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - b * (self / b).trunc()
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for DoubleDouble {
            #[inline]
            fn $m(&mut self, b: Self) {
                *self = *self $op b;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&o.lo),
            c => Some(c),
        }
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(it: I) -> Self {
        it.fold(Self::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a DoubleDouble> for DoubleDouble {
    fn sum<I: Iterator<Item = &'a Self>>(it: I) -> Self {
        it.fold(Self::ZERO, |a, b| a + *b)
    }
}

impl Product for DoubleDouble {
    fn product<I: Iterator<Item = Self>>(it: I) -> Self {
        it.fold(Self::ONE, |a, b| a * b)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid double-double literal")]
pub struct ParseDoubleDoubleError;

impl FromStr for DoubleDouble {
    type Err = ParseDoubleDoubleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "inf" | "+inf" | "infinity" => return Ok(Self::infinity()),
            "-inf" | "-infinity" => return Ok(Self::neg_infinity()),
            "NaN" | "nan" => return Ok(Self::nan()),
            _ => {}
        }
        let (neg, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| ParseDoubleDoubleError)?),
            None => (body, 0),
        };
        let mut x = Self::ZERO;
        let mut scale = 0i32;
        let mut seen_dot = false;
        let mut any = false;
        for c in mant.chars() {
            match c {
                '0'..='9' => {
                    x = x.mul_f64(10.0) + Self::c((c as u8 - b'0') as f64);
                    if seen_dot {
                        scale -= 1;
                    }
                    any = true;
                }
                '.' if !seen_dot => seen_dot = true,
                _ => return Err(ParseDoubleDoubleError),
            }
        }
        if !any {
            return Err(ParseDoubleDoubleError);
        }
        let e = exp + scale;
        let p = Self::c(10.0).powi(e.abs());
        let x = if e >= 0 { x * p } else { x / p };
        Ok(if neg { -x } else { x })
    }
}

impl fmt::Display for DoubleDouble {
    /// Scientific notation; `{:.N}` sets the digits after the point (default 31).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.hi.is_nan() {
            return f.write_str("NaN");
        }
        if self.hi.is_infinite() {
            return f.write_str(if self.hi > 0.0 { "inf" } else { "-inf" });
        }
        if self.hi == 0.0 {
            return f.write_str("0");
        }
        let digits = f.precision().unwrap_or(31).min(33) + 1;
        let mut x = self.abs();
        let mut e = x.hi.log10().floor() as i32;
        let p = Self::c(10.0).powi(e.abs());
        x = if e >= 0 { x / p } else { x * p };
        if x.hi >= 10.0 {
            x /= Self::c(10.0);
            e += 1;
        } else if x.hi < 1.0 {
            x = x.mul_f64(10.0);
            e -= 1;
        }
        let mut d = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let q = x.hi.floor().clamp(0.0, 9.0);
            d.push(q as u8);
            x = (x - Self::c(q)).mul_f64(10.0);
        }
        // round on the extra digit
        if d[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    d.insert(0, 1);
                    e += 1;
                    break;
                }
                i -= 1;
                if d[i] == 9 {
                    d[i] = 0;
                } else {
                    d[i] += 1;
                    break;
                }
            }
        }
        d.truncate(digits);
        let mut out = String::with_capacity(digits + 8);
        if self.hi < 0.0 {
            out.push('-');
        }
        out.push((b'0' + d[0]) as char);
        if digits > 1 {
            out.push('.');
            for &q in &d[1..] {
                out.push((b'0' + q) as char);
            }
        }
        out.push('e');
        out.push_str(&e.to_string());
        f.write_str(&out)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = ParseDoubleDoubleError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseDoubleDoubleError);
        }
        s.parse()
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        if !t.hi.is_finite() || t.hi.abs() >= 9.2e18 {
            return None;
        }
        Some(t.hi as i64 + t.lo as i64)
    }
    fn to_u64(&self) -> Option<u64> {
        let t = self.trunc();
        if !t.hi.is_finite() || t.hi < 0.0 || t.hi >= 1.8e19 {
            return None;
        }
        Some((t.hi as i128 + t.lo as i128) as u64)
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
    fn to_f32(&self) -> Option<f32> {
        Some((self.hi + self.lo) as f32)
    }
}

impl NumCast for DoubleDouble {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        if let Some(i) = n.to_i64() {
            let f = n.to_f64()?;
            if f.trunc() == f {
                return Some(<Self as From<i64>>::from(i));
            }
            return Some(Self::c(f));
        }
        n.to_f64().map(Self::c)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        Some(<Self as From<i64>>::from(n))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::new(hi, lo))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Self::c(n))
    }
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        Self { hi: f64::NAN, lo: f64::NAN }
    }
    fn infinity() -> Self {
        Self { hi: f64::INFINITY, lo: 0.0 }
    }
    fn neg_infinity() -> Self {
        Self { hi: f64::NEG_INFINITY, lo: 0.0 }
    }
    fn neg_zero() -> Self {
        Self { hi: -0.0, lo: 0.0 }
    }
    fn min_value() -> Self {
        -Self::max_value()
    }
    fn min_positive_value() -> Self {
        Self::c(f64::MIN_POSITIVE * 2f64.powi(53))
    }
    fn epsilon() -> Self {
        Self::EPSILON
    }
    fn max_value() -> Self {
        Self::new(f64::MAX, f64::MAX * 2f64.powi(-54))
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }
    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            Self::new(hi, self.lo.floor())
        } else {
            Self { hi, lo: 0.0 }
        }
    }
    fn ceil(self) -> Self {
        let hi = self.hi.ceil();
        if hi == self.hi {
            Self::new(hi, self.lo.ceil())
        } else {
            Self { hi, lo: 0.0 }
        }
    }
    fn round(self) -> Self {
        self.nint()
    }
    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Self::c(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::ONE / self
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let mut r = Self::ONE;
        let mut b = self;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                r *= b;
            }
            k >>= 1;
            if k > 0 {
                b = b.sqr();
            }
        }
        if n < 0 {
            r.recip()
        } else {
            r
        }
    }
    fn powf(self, n: Self) -> Self {
        if n.fract().is_zero() && n.hi.abs() < 1e9 {
            return self.powi(n.hi as i32);
        }
        (n * self.ln_dd()).exp_dd()
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::ZERO } else { Self::nan() };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (h, l) = two_sum(ax, (self - Self::c(ax).sqr()).hi * (x * 0.5));
        Self { hi: h, lo: l }
    }
    fn exp(self) -> Self {
        self.exp_dd()
    }
    fn exp2(self) -> Self {
        (self * Self::LN_2).exp_dd()
    }
    fn ln(self) -> Self {
        self.ln_dd()
    }
    fn log(self, base: Self) -> Self {
        self.ln_dd() / base.ln_dd()
    }
    fn log2(self) -> Self {
        self.ln_dd() / Self::LN_2
    }
    fn log10(self) -> Self {
        self.ln_dd() / Self::LN_10
    }
    fn max(self, o: Self) -> Self {
        if self.is_nan() || o > self {
            o
        } else {
            self
        }
    }
    fn min(self, o: Self) -> Self {
        if self.is_nan() || o < self {
            o
        } else {
            self
        }
    }
    fn abs_sub(self, o: Self) -> Self {
        if self <= o {
            Self::ZERO
        } else {
            self - o
        }
    }
    fn cbrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let a = self.abs();
        let mut y = Self::c(a.hi.cbrt());
        // Newton on y^3 = a
        for _ in 0..2 {
            y = y - (y * y * y - a) / (Self::c(3.0) * y.sqr());
        }
        if self.hi < 0.0 {
            -y
        } else {
            y
        }
    }
    fn hypot(self, o: Self) -> Self {
        (self.sqr() + o.sqr()).sqrt()
    }
    fn sin(self) -> Self {
        self.sin_cos_dd().0
    }
    fn cos(self) -> Self {
        self.sin_cos_dd().1
    }
    fn tan(self) -> Self {
        let (s, c) = self.sin_cos_dd();
        s / c
    }
    fn asin(self) -> Self {
        let a = self.abs();
        if a.hi > 1.0 || (a.hi == 1.0 && a.lo > 0.0) {
            return Self::nan();
        }
        self.atan2((Self::ONE - self.sqr()).sqrt())
    }
    fn acos(self) -> Self {
        let a = self.abs();
        if a.hi > 1.0 || (a.hi == 1.0 && a.lo > 0.0) {
            return Self::nan();
        }
        (Self::ONE - self.sqr()).sqrt().atan2(self)
    }
    fn atan(self) -> Self {
        self.atan2(Self::ONE)
    }
    fn atan2(self, x: Self) -> Self {
        let y = self;
        if x.is_zero() && y.is_zero() {
            return Self::ZERO;
        }
        if x.is_zero() {
            return if y.hi > 0.0 { Self::FRAC_PI_2 } else { -Self::FRAC_PI_2 };
        }
        if y.is_zero() {
            return if x.hi > 0.0 { Self::ZERO } else { Self::PI };
        }
        let r = (x.sqr() + y.sqr()).sqrt();
        let xx = x / r;
        let yy = y / r;
        let mut z = Self::c(y.hi.atan2(x.hi));
        for _ in 0..2 {
            let (sz, cz) = z.sin_cos_dd();
            if xx.hi.abs() > yy.hi.abs() {
                z += (yy - sz) / cz;
            } else {
                z -= (xx - cz) / sz;
            }
        }
        z
    }
    fn sin_cos(self) -> (Self, Self) {
        self.sin_cos_dd()
    }
    fn exp_m1(self) -> Self {
        if self.hi.abs() < 0.5 {
            self.expm1_small()
        } else {
            self.exp_dd() - Self::ONE
        }
    }
    fn ln_1p(self) -> Self {
        let u = Self::ONE + self;
        if u == Self::ONE {
            return self;
        }
        if self.hi.abs() < 0.5 {
            // one Newton step on exp_m1 from the f64 guess
            let y = Self::c(self.hi.ln_1p());
            let e = y.exp_m1();
            return y - (e - self) / (e + Self::ONE);
        }
        u.ln_dd()
    }
    fn sinh(self) -> Self {
        if self.hi.abs() < 0.5 {
            return self.sinh_small();
        }
        let e = self.exp_dd();
        (e - e.recip()).ldexp(-1)
    }
    fn cosh(self) -> Self {
        let e = self.exp_dd();
        (e + e.recip()).ldexp(-1)
    }
    fn tanh(self) -> Self {
        if self.hi.abs() > 40.0 {
            return Self::c(self.hi.signum());
        }
        if self.hi.abs() < 0.5 {
            let s = self.sinh_small();
            let c = (Self::ONE + s.sqr()).sqrt();
            return s / c;
        }
        let e = self.exp_dd();
        let ei = e.recip();
        (e - ei) / (e + ei)
    }
    fn asinh(self) -> Self {
        let a = self.abs();
        let r = if a.hi < 0.5 {
            // ln1p keeps relative accuracy near zero
            (a + a.sqr() / (Self::ONE + (Self::ONE + a.sqr()).sqrt())).ln_1p()
        } else {
            (a + (a.sqr() + Self::ONE).sqrt()).ln_dd()
        };
        if self.hi < 0.0 {
            -r
        } else {
            r
        }
    }
    fn acosh(self) -> Self {
        if self.hi < 1.0 {
            return Self::nan();
        }
        (self + (self.sqr() - Self::ONE).sqrt()).ln_dd()
    }
    fn atanh(self) -> Self {
        ((Self::ONE + self) / (Self::ONE - self)).ln_dd().ldexp(-1)
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
}

impl FloatConst for DoubleDouble {
    fn E() -> Self {
        Self::E
    }
    fn FRAC_1_PI() -> Self {
        Self::ONE / Self::PI
    }
    fn FRAC_1_SQRT_2() -> Self {
        Self::SQRT_2.ldexp(-1)
    }
    fn FRAC_2_PI() -> Self {
        Self::c(2.0) / Self::PI
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Self::c(2.0) / Self::PI.sqrt()
    }
    fn FRAC_PI_2() -> Self {
        Self::FRAC_PI_2
    }
    fn FRAC_PI_3() -> Self {
        Self::PI / Self::c(3.0)
    }
    fn FRAC_PI_4() -> Self {
        Self::PI.ldexp(-2)
    }
    fn FRAC_PI_6() -> Self {
        Self::PI / Self::c(6.0)
    }
    fn FRAC_PI_8() -> Self {
        Self::PI.ldexp(-3)
    }
    fn LN_10() -> Self {
        Self::LN_10
    }
    fn LN_2() -> Self {
        Self::LN_2
    }
    fn LOG10_E() -> Self {
        Self::ONE / Self::LN_10
    }
    fn LOG2_E() -> Self {
        Self::ONE / Self::LN_2
    }
    fn PI() -> Self {
        Self::PI
    }
    fn SQRT_2() -> Self {
        Self::SQRT_2
    }
    fn TAU() -> Self {
        Self::TAU
    }
    fn LOG10_2() -> Self {
        Self::LN_2 / Self::LN_10
    }
    fn LOG2_10() -> Self {
        Self::LN_10 / Self::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = DoubleDouble;

    #[test]
    fn renormalized_sum() {
        let a = D::c(1.0) + D::c(1e-20);
        assert_eq!(a.hi(), 1.0);
        assert_eq!(a.lo(), 1e-20);
        assert_eq!((a - D::ONE).hi(), 1e-20);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = D::c(3.0).sqrt();
        let b = D::PI;
        let r = (a * b) / b - a;
        assert!(r.abs().hi() < 1e-31);
    }

    #[test]
    fn parse_and_print() {
        let x: D = "3.14159265358979323846264338327950288".parse().unwrap();
        assert!((x - D::PI).abs().hi() < 1e-31);
        assert_eq!(format!("{:.20}", D::PI), "3.14159265358979323846e0");
        assert_eq!(format!("{:.3}", D::c(-0.00125)), "-1.250e-3");
    }

    #[test]
    fn rounding() {
        assert_eq!(D::c(2.5).round(), D::c(3.0));
        assert_eq!(D::c(-2.5).round(), D::c(-3.0));
        assert_eq!((D::c(2.0) + D::c(1e-20)).floor(), D::c(2.0));
        assert_eq!((D::c(2.0) - D::c(1e-20)).floor(), D::c(1.0));
        assert_eq!((D::c(-2.0) + D::c(1e-20)).trunc(), D::c(-1.0));
    }
}
