//! Complete elliptic integral of the first kind and Jacobi elliptic
//! functions, parameter convention `m = k²`.

use crate::scalar::Real;

/// Arithmetic-geometric mean.
pub fn agm<T: Real>(mut a: T, mut b: T) -> T {
    for _ in 0..64 {
        let an = (a + b) * T::lit(0.5);
        b = (a * b).sqrt();
        a = an;
        if (a - b).abs() <= T::epsilon() * a {
            break;
        }
    }
    a
}

/// `K(m) = π / (2 AGM(1, √(1−m)))` for `0 ≤ m < 1`.
pub fn ellip_k<T: Real>(m: T) -> T {
    T::FRAC_PI_2() / agm(T::one(), (T::one() - m).sqrt())
}

/// `(sn, cn, dn)(u | m)` by descending Landen transformation, `0 ≤ m < 1`.
pub fn jacobi<T: Real>(u: T, m: T) -> (T, T, T) {
    if m == T::zero() {
        let (s, c) = u.sin_cos();
        return (s, c, T::one());
    }
    let mut a = [T::zero(); 40];
    let mut c = [T::zero(); 40];
    a[0] = T::one();
    let mut b = (T::one() - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < 39 && c[n].abs() > T::epsilon() {
        let an = (a[n] + b) * T::lit(0.5);
        c[n + 1] = (a[n] - b) * T::lit(0.5);
        b = (a[n] * b).sqrt();
        a[n + 1] = an;
        n += 1;
    }
    let mut phi = T::lit(2f64.powi(n as i32)) * a[n] * u;
    let mut prev = phi;
    for j in (1..=n).rev() {
        prev = phi;
        phi = (phi + (c[j] * phi.sin() / a[j]).asin()) * T::lit(0.5);
    }
    let (s, co) = phi.sin_cos();
    let dn = if n == 0 { T::one() } else { co / (prev - phi).cos() };
    (s, co, dn)
}
