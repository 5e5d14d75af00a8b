//! Riemann zeta on the real line, needed for the origin correction of
//! trapezoid sums over `r^s g(r)`.

// B_{2j} / (2j)!
const BERNOULLI_OVER_FACT: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// `zeta(z)` for real `z != 1` by Euler–Maclaurin summation. Accurate to about
/// 1e-13 for `z` in `[-6, 6]`.
pub(crate) fn zeta(z: f64) -> f64 {
    const N: usize = 12;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-z)).sum();
    sum += n.powf(1.0 - z) / (z - 1.0) + 0.5 * n.powf(-z);
    // rising factorial z (z+1) ... (z + 2i)
    let mut rising = z;
    for (i, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        let k = 2.0 * i as f64;
        if i > 0 {
            rising *= (z + k - 1.0) * (z + k);
        }
        sum += c * rising * n.powf(-z - k - 1.0);
    }
    sum
}
