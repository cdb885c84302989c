/// Determinant of a row-major `n×n` matrix by partial-pivot LU; the input is
/// overwritten.
pub(crate) fn det_in_place(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = m[k * n + k].abs();
        for r in (k + 1)..n {
            let v = m[r * n + k].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let p = m[k * n + k];
        det *= p;
        for r in (k + 1)..n {
            let f = m[r * n + k] / p;
            if f != 0.0 {
                for c in (k + 1)..n {
                    m[r * n + c] -= f * m[k * n + c];
                }
            }
        }
    }
    det
}
