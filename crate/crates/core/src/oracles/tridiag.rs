/// Thomas algorithm for `a_i x_{i−1} + b_i x_i + c_i x_{i+1} = d_i`; `a_0` and `c_{n−1}` are
/// ignored. Stable for diagonally dominant systems. `scratch` must hold `n` values.
pub(crate) fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64], x: &mut [f64], scratch: &mut [f64]) {
    let n = b.len();
    debug_assert!(a.len() == n && c.len() == n && d.len() == n && x.len() == n && scratch.len() >= n);
    if n == 0 {
        return;
    }
    scratch[0] = c[0] / b[0];
    x[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * scratch[i - 1];
        scratch[i] = c[i] / m;
        x[i] = (d[i] - a[i] * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i] * x[i + 1];
    }
}
