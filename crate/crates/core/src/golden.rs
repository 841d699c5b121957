//! Golden-section minimization on a closed bracket.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GoldenOutcome {
    /// Best point evaluated.
    pub x: f64,
    pub fx: f64,
    pub evals: usize,
    /// False when the search collapsed onto an end of the initial bracket,
    /// i.e. the function was not unimodal with an interior minimum.
    pub interior: bool,
}

/// Shrinks `[lo, hi]` until its width is at most `tol`. `f` may fail; the
/// first error aborts the search.
pub(crate) fn minimize<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<GoldenOutcome, E> {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 2;
    let (mut best_x, mut best_f) = if fc <= fd { (c, fc) } else { (d, fd) };

    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            evals += 1;
            if fc < best_f {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            evals += 1;
            if fd < best_f {
                best_x = d;
                best_f = fd;
            }
        }
    }
    let edge = 2.0 * tol.max((hi - lo) * 1e-12);
    let interior = a - lo > edge && hi - b > edge;
    Ok(GoldenOutcome {
        x: best_x,
        fx: best_f,
        evals,
        interior,
    })
}
