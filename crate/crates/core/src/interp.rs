//! Piecewise cubic Lagrange interpolation on a sorted node list.

/// Index of the first node of the 4-point stencil used for `x`.
pub fn stencil_start(nodes: &[f64], x: f64) -> usize {
    let n = nodes.len();
    if n <= 4 {
        return 0;
    }
    // cell [nodes[i], nodes[i+1]] containing x
    let i = match nodes.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    };
    i.saturating_sub(1).min(n - 4)
}

/// Lagrange basis weights of the stencil starting at `start` evaluated at `x`.
pub fn stencil_weights(nodes: &[f64], start: usize, x: f64) -> [f64; 4] {
    let m = nodes.len().min(4);
    let mut w = [0.0; 4];
    for (j, wj) in w.iter_mut().enumerate().take(m) {
        let xj = nodes[start + j];
        let mut l = 1.0;
        for k in 0..m {
            if k != j {
                let xk = nodes[start + k];
                l *= (x - xk) / (xj - xk);
            }
        }
        *wj = l;
    }
    w
}

/// Interpolates `values` (given at `nodes`) at `x`; exact at nodes.
pub fn eval(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    if nodes.len() == 1 {
        return values[0];
    }
    if let Ok(i) = nodes.binary_search_by(|p| p.total_cmp(&x)) {
        return values[i];
    }
    let start = stencil_start(nodes, x);
    let w = stencil_weights(nodes, start, x);
    let m = nodes.len().min(4);
    (0..m).map(|j| w[j] * values[start + j]).sum()
}
