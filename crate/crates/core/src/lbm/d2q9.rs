//! D2Q9 velocity set.
//!
//! Ordering: rest, the four axis directions counter-clockwise from +x, then
//! the four diagonals counter-clockwise from (+1, +1).

pub const Q: usize = 9;

pub const C: [[i32; 2]; Q] = [
    [0, 0],
    [1, 0],
    [0, 1],
    [-1, 0],
    [0, -1],
    [1, 1],
    [-1, 1],
    [-1, -1],
    [1, -1],
];

pub const W: [f64; Q] = [
    4.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
];

pub const OPPOSITE: [usize; Q] = [0, 3, 4, 1, 2, 7, 8, 5, 6];

/// Squared lattice speed of sound.
pub const CS2: f64 = 1.0 / 3.0;

/// Equilibrium of the incompressible BGK model (reference density 1): the
/// density fluctuation enters linearly, the velocity is the momentum itself.
#[inline(always)]
pub fn equilibrium(q: usize, rho: f64, ux: f64, uy: f64) -> f64 {
    let cu = C[q][0] as f64 * ux + C[q][1] as f64 * uy;
    W[q] * (rho + 3.0 * cu + 4.5 * cu * cu - 1.5 * (ux * ux + uy * uy))
}

/// Direction index of an axis vector.
pub fn axis_index(dx: i32, dy: i32) -> Option<usize> {
    (1..5).find(|&q| C[q] == [dx, dy])
}

/// Direction index of any lattice vector.
pub fn index_of(v: [i32; 2]) -> usize {
    C.iter().position(|&c| c == v).expect("lattice vector")
}

/// For an inward axis direction `n`, the directions
/// `[t, -t, -n, n+t, n-t, -n+t, -n-t]` with `t` the normal rotated by +90°.
pub fn open_boundary_stencil(n: usize) -> [usize; 7] {
    let [nx, ny] = C[n];
    let [tx, ty] = [-ny, nx];
    [
        index_of([tx, ty]),
        index_of([-tx, -ty]),
        index_of([-nx, -ny]),
        index_of([nx + tx, ny + ty]),
        index_of([nx - tx, ny - ty]),
        index_of([-nx + tx, -ny + ty]),
        index_of([-nx - tx, -ny - ty]),
    ]
}
