use super::d2q9::{self, equilibrium, open_boundary_stencil, OPPOSITE, Q};
use super::geometry::{BoundaryKey, Voxels, NONE};
use super::{LbmError, UnitConverter, MAX_LATTICE_VELOCITY};
use crate::netmodel::Point;

/// Pull-source markers beyond any fluid index.
const BOUNCE: u32 = u32::MAX - 1;
const OPEN: u32 = u32::MAX - 2;

/// Relative change of the velocity norm below which a lattice counts as steady.
pub const STEADY_TOLERANCE: f64 = 1e-7;
/// Steps between two steady-state checks.
pub const STEADY_CHECK_INTERVAL: u64 = 1000;

/// Value imposed at an open boundary, in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryValue {
    /// Pa, uniform over the section.
    Pressure(f64),
    /// m²/s into the lattice, with a parabolic profile.
    FlowRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Wall,
    Fluid,
    Port(BoundaryKey),
}

/// Section-averaged pressure and the flow rate into the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortMeasurement {
    /// Pa
    pub pressure: f64,
    /// m²/s
    pub flow_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub steps: u64,
    pub converged: bool,
    /// Last relative change of the velocity norm.
    pub change: f64,
}

#[derive(Debug, Clone)]
struct Port {
    key: BoundaryKey,
    center: Point,
    inward_q: usize,
    width: f64,
    cells: Vec<u32>,
    offsets: Vec<f64>,
    value: Option<BoundaryValue>,
}

/// Developed channel profile carrying `flow_rate` (m²/s) across `width`, at
/// distance `s` from one wall: `6 (Q/w) s (w - s) / w²`.
pub fn parabolic_velocity(flow_rate: f64, width: f64, s: f64) -> f64 {
    6.0 * flow_rate / width * s * (width - s) / (width * width)
}

/// Closure of an open boundary cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OpenBoundary {
    /// Non-equilibrium extrapolation from the next cell inwards.
    #[default]
    Extrapolation,
    /// Zou–He reconstruction of the unknown populations.
    ZouHe,
}

/// Closure data of one boundary cell.
#[derive(Debug, Clone, Copy)]
struct Slot {
    stencil: [usize; 7],
    normal: usize,
    /// Fluid cell one step inwards.
    neighbour: u32,
    pressure: bool,
    /// Lattice density or inward lattice velocity.
    value: f64,
}

/// Sparse D2Q9 lattice: only fluid cells are stored, streaming follows a
/// precomputed pull table, walls are halfway bounce-back.
#[derive(Debug, Clone)]
pub struct Lattice {
    nx: usize,
    ny: usize,
    origin: Point,
    converter: UnitConverter,
    index: Vec<u32>,
    coords: Vec<(u32, u32)>,
    /// `src[cell * Q + q]`: where population `q` of `cell` is pulled from.
    src: Vec<u32>,
    /// Populations, `f[q * n + cell]`.
    f: Vec<f64>,
    scratch: Vec<f64>,
    ports: Vec<Port>,
    slot_of: Vec<u32>,
    slots: Vec<Slot>,
    omega: f64,
    open: OpenBoundary,
    iteration: u64,
}

impl Lattice {
    pub(crate) fn from_voxels(v: Voxels, converter: UnitConverter) -> Lattice {
        let n = v.coords.len();
        let mut slot_of = vec![NONE; n];
        let mut slots = Vec::new();
        let mut port_normal = vec![usize::MAX; n];
        for p in &v.ports {
            for &c in &p.cells {
                port_normal[c as usize] = p.inward_q;
                slot_of[c as usize] = slots.len() as u32;
                slots.push(Slot {
                    stencil: open_boundary_stencil(p.inward_q),
                    normal: p.inward_q,
                    neighbour: NONE,
                    pressure: true,
                    value: 1.0,
                });
            }
        }
        let mut src = vec![0u32; n * Q];
        for (cell, &(i, j)) in v.coords.iter().enumerate() {
            for q in 0..Q {
                let [cx, cy] = d2q9::C[q];
                let (si, sj) = (i as i64 - cx as i64, j as i64 - cy as i64);
                let inside = si >= 0 && sj >= 0 && si < v.nx as i64 && sj < v.ny as i64;
                let k = if inside {
                    v.index[sj as usize * v.nx + si as usize]
                } else {
                    NONE
                };
                src[cell * Q + q] = if k != NONE {
                    k
                } else if port_normal[cell] != usize::MAX && {
                    let [nx, ny] = d2q9::C[port_normal[cell]];
                    cx * nx + cy * ny > 0
                } {
                    OPEN
                } else {
                    BOUNCE
                };
            }
        }
        let ports = v
            .ports
            .into_iter()
            .map(|p| Port {
                key: p.key,
                center: p.center,
                inward_q: p.inward_q,
                width: p.width,
                cells: p.cells,
                offsets: p.offsets,
                value: None,
            })
            .collect();
        let mut lattice = Lattice {
            nx: v.nx,
            ny: v.ny,
            origin: v.origin,
            converter,
            index: v.index,
            coords: v.coords,
            src,
            f: vec![0.0; n * Q],
            scratch: vec![0.0; n * Q],
            ports,
            slot_of,
            slots,
            omega: 1.0 / converter.tau(),
            open: OpenBoundary::default(),
            iteration: 0,
        };
        for cell in 0..n {
            let slot = lattice.slot_of[cell];
            if slot != NONE {
                let slot = &mut lattice.slots[slot as usize];
                let s = lattice.src[cell * Q + OPPOSITE[slot.normal]];
                slot.neighbour = if s < OPEN { s } else { cell as u32 };
            }
        }
        lattice.initialize_uniform(0.0);
        lattice
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Lower-left corner of cell (0, 0).
    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn converter(&self) -> &UnitConverter {
        &self.converter
    }

    pub fn fluid_cells(&self) -> usize {
        self.coords.len()
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn open_boundary(&self) -> OpenBoundary {
        self.open
    }

    pub fn set_open_boundary(&mut self, open: OpenBoundary) {
        self.open = open;
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        let dx = self.converter.dx;
        Point::new(
            self.origin.x + (i as f64 + 0.5) * dx,
            self.origin.y + (j as f64 + 0.5) * dx,
        )
    }

    pub fn cell_kind(&self, i: usize, j: usize) -> CellKind {
        if i >= self.nx || j >= self.ny {
            return CellKind::Wall;
        }
        let k = self.index[j * self.nx + i];
        if k == NONE {
            return CellKind::Wall;
        }
        if self.slot_of[k as usize] != NONE {
            let port = self
                .ports
                .iter()
                .find(|p| p.cells.contains(&k))
                .expect("slot belongs to a port");
            return CellKind::Port(port.key);
        }
        CellKind::Fluid
    }

    pub fn boundary_keys(&self) -> Vec<BoundaryKey> {
        self.ports.iter().map(|p| p.key).collect()
    }

    /// Number of lattice cells across a boundary section.
    pub fn boundary_cells(&self, key: BoundaryKey) -> Option<usize> {
        self.ports
            .iter()
            .find(|p| p.key == key)
            .map(|p| p.cells.len())
    }

    pub fn boundary_center(&self, key: BoundaryKey) -> Option<Point> {
        self.ports.iter().find(|p| p.key == key).map(|p| p.center)
    }

    fn port_index(&self, key: BoundaryKey) -> Result<usize, LbmError> {
        self.ports
            .iter()
            .position(|p| p.key == key)
            .ok_or(LbmError::UnknownBoundary(key))
    }

    fn set_cell_equilibrium(&mut self, cell: usize, rho: f64, ux: f64, uy: f64) {
        let n = self.coords.len();
        for q in 0..Q {
            self.f[q * n + cell] = equilibrium(q, rho, ux, uy);
        }
    }

    /// Fluid at rest at a uniform pressure.
    pub fn initialize_uniform(&mut self, pressure: f64) {
        let rho = self.converter.pressure_to_density(pressure);
        for cell in 0..self.coords.len() {
            self.set_cell_equilibrium(cell, rho, 0.0, 0.0);
        }
        self.iteration = 0;
    }

    /// Equilibrium populations for a physical field `point → (p, [ux, uy])`.
    pub fn initialize_with(&mut self, field: impl Fn(Point) -> (f64, [f64; 2])) {
        let c = self.converter;
        for cell in 0..self.coords.len() {
            let (i, j) = self.coords[cell];
            let (p, [ux, uy]) = field(self.cell_center(i as usize, j as usize));
            self.set_cell_equilibrium(
                cell,
                c.pressure_to_density(p),
                c.velocity_to_lattice(ux),
                c.velocity_to_lattice(uy),
            );
        }
        self.iteration = 0;
    }

    pub fn set_pressure_bc(&mut self, key: BoundaryKey, pressure: f64) -> Result<(), LbmError> {
        let rho = self.converter.pressure_to_density(pressure);
        if !(rho.is_finite() && rho > 0.0) {
            return Err(LbmError::NonFinite(rho));
        }
        let k = self.port_index(key)?;
        for &cell in &self.ports[k].cells {
            let slot = &mut self.slots[self.slot_of[cell as usize] as usize];
            slot.pressure = true;
            slot.value = rho;
        }
        self.ports[k].value = Some(BoundaryValue::Pressure(pressure));
        Ok(())
    }

    /// Imposes a parabolic inflow profile carrying `flow_rate` (m²/s, positive
    /// into the lattice).
    pub fn set_flow_bc(&mut self, key: BoundaryKey, flow_rate: f64) -> Result<(), LbmError> {
        if !flow_rate.is_finite() {
            return Err(LbmError::NonFinite(flow_rate));
        }
        let k = self.port_index(key)?;
        let port = &self.ports[k];
        let w = port.width;
        let mean = flow_rate / w;
        let peak = self.converter.velocity_to_lattice(1.5 * mean).abs();
        if peak > MAX_LATTICE_VELOCITY {
            return Err(LbmError::MachLimit {
                lattice_velocity: peak,
            });
        }
        for (&cell, &s) in port.cells.iter().zip(&port.offsets) {
            let u = parabolic_velocity(flow_rate, w, s);
            let slot = &mut self.slots[self.slot_of[cell as usize] as usize];
            slot.pressure = false;
            slot.value = self.converter.velocity_to_lattice(u);
        }
        self.ports[k].value = Some(BoundaryValue::FlowRate(flow_rate));
        Ok(())
    }

    pub fn boundary_value(&self, key: BoundaryKey) -> Option<BoundaryValue> {
        self.ports
            .iter()
            .find(|p| p.key == key)
            .and_then(|p| p.value)
    }

    /// One fused stream-and-collide update.
    pub fn step(&mut self) -> Result<(), LbmError> {
        if let Some(p) = self.ports.iter().find(|p| p.value.is_none()) {
            return Err(LbmError::MissingBoundaryValue(p.key));
        }
        let n = self.coords.len();
        let omega = self.omega;
        let f = &self.f;
        let out = &mut self.scratch;
        let mut bad = None;
        for cell in 0..n {
            let src = &self.src[cell * Q..cell * Q + Q];
            let mut fl = [0.0; Q];
            for q in 0..Q {
                let s = src[q];
                fl[q] = if s < OPEN {
                    f[q * n + s as usize]
                } else if s == BOUNCE {
                    f[OPPOSITE[q] * n + cell]
                } else {
                    0.0
                };
            }
            let slot = self.slot_of[cell];
            if slot != NONE {
                let slot = &self.slots[slot as usize];
                if self.open == OpenBoundary::Extrapolation {
                    if !extrapolate(f, &self.src, omega, cell, slot, out) {
                        bad.get_or_insert(cell);
                    }
                    continue;
                }
                zou_he(&mut fl, slot);
            }
            let rho: f64 = fl.iter().sum();
            let ux = fl[1] - fl[3] + fl[5] - fl[6] - fl[7] + fl[8];
            let uy = fl[2] - fl[4] + fl[5] + fl[6] - fl[7] - fl[8];
            if !(rho > 0.0 && rho.is_finite() && ux.is_finite() && uy.is_finite()) {
                bad.get_or_insert(cell);
                continue;
            }
            for q in 0..Q {
                out[q * n + cell] = fl[q] - omega * (fl[q] - equilibrium(q, rho, ux, uy));
            }
        }
        if let Some(cell) = bad {
            let (i, j) = self.coords[cell];
            return Err(LbmError::Diverged {
                cell: (i as usize, j as usize),
                iteration: self.iteration + 1,
            });
        }
        std::mem::swap(&mut self.f, &mut self.scratch);
        self.iteration += 1;
        Ok(())
    }

    pub fn advance(&mut self, steps: u64) -> Result<(), LbmError> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    /// Density and velocity of a fluid cell, lattice units.
    fn moments(&self, cell: usize) -> (f64, f64, f64) {
        let n = self.coords.len();
        let g = |q: usize| self.f[q * n + cell];
        let rho = (0..Q).map(g).sum();
        let ux = g(1) - g(3) + g(5) - g(6) - g(7) + g(8);
        let uy = g(2) - g(4) + g(5) + g(6) - g(7) - g(8);
        (rho, ux, uy)
    }

    pub fn measure_port(&self, key: BoundaryKey) -> Result<PortMeasurement, LbmError> {
        let port = &self.ports[self.port_index(key)?];
        let [nx, ny] = d2q9::C[port.inward_q];
        let (mut rho_sum, mut flux) = (0.0, 0.0);
        for &cell in &port.cells {
            let (rho, ux, uy) = self.moments(cell as usize);
            rho_sum += rho;
            flux += ux * nx as f64 + uy * ny as f64;
        }
        let c = &self.converter;
        Ok(PortMeasurement {
            pressure: c.density_to_pressure(rho_sum / port.cells.len() as f64),
            flow_rate: c.velocity_to_physical(flux) * c.dx,
        })
    }

    /// Lattice-unit L2 norm of the velocity field.
    pub fn velocity_norm(&self) -> f64 {
        (0..self.coords.len())
            .map(|c| {
                let (_, ux, uy) = self.moments(c);
                ux * ux + uy * uy
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Steps until the velocity norm changes by at most `tolerance` relative
    /// over `interval` steps, or `max_steps` have been taken.
    pub fn run_to_steady(
        &mut self,
        tolerance: f64,
        interval: u64,
        max_steps: u64,
    ) -> Result<SteadyState, LbmError> {
        let start = self.iteration;
        let mut previous = self.velocity_norm();
        let mut change = f64::INFINITY;
        while self.iteration - start < max_steps {
            let chunk = interval.min(max_steps - (self.iteration - start));
            self.advance(chunk)?;
            let norm = self.velocity_norm();
            change = (norm - previous).abs() / norm.max(f64::MIN_POSITIVE);
            previous = norm;
            if chunk == interval && change <= tolerance {
                return Ok(SteadyState {
                    steps: self.iteration - start,
                    converged: true,
                    change,
                });
            }
        }
        Ok(SteadyState {
            steps: self.iteration - start,
            converged: false,
            change,
        })
    }

    /// Physical pressure and velocity on every fluid cell.
    pub fn macroscopics(&self) -> Macroscopics {
        let c = &self.converter;
        let mut pressure = Vec::with_capacity(self.coords.len());
        let mut velocity = Vec::with_capacity(self.coords.len());
        for cell in 0..self.coords.len() {
            let (rho, ux, uy) = self.moments(cell);
            pressure.push(c.density_to_pressure(rho));
            velocity.push([c.velocity_to_physical(ux), c.velocity_to_physical(uy)]);
        }
        let kind = (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .map(|(i, j)| match self.cell_kind(i, j) {
                CellKind::Wall => 0,
                CellKind::Fluid => 1,
                CellKind::Port(_) => 2,
            })
            .collect();
        Macroscopics {
            nx: self.nx,
            ny: self.ny,
            origin: self.origin,
            dx: c.dx,
            index: self.index.clone(),
            coords: self.coords.clone(),
            kind,
            pressure,
            velocity,
        }
    }
}

/// Writes the post-collision populations of an open boundary cell: the
/// equilibrium of the imposed state plus the relaxed non-equilibrium part of
/// the neighbour's populations after this step's streaming. A pressure port
/// takes the neighbour's normal velocity, a velocity port its density.
#[inline]
fn extrapolate(
    f: &[f64],
    src: &[u32],
    omega: f64,
    cell: usize,
    slot: &Slot,
    out: &mut [f64],
) -> bool {
    let n = f.len() / Q;
    let nb = slot.neighbour as usize;
    let mut g = [0.0; Q];
    for q in 0..Q {
        let s = src[nb * Q + q];
        g[q] = if s < OPEN {
            f[q * n + s as usize]
        } else {
            f[OPPOSITE[q] * n + nb]
        };
    }
    let rho_nb: f64 = g.iter().sum();
    let ux_nb = g[1] - g[3] + g[5] - g[6] - g[7] + g[8];
    let uy_nb = g[2] - g[4] + g[5] + g[6] - g[7] - g[8];
    let [cx, cy] = d2q9::C[slot.normal];
    let (cx, cy) = (cx as f64, cy as f64);
    let (rho, un) = if slot.pressure {
        (slot.value, ux_nb * cx + uy_nb * cy)
    } else {
        (rho_nb, slot.value)
    };
    let (ux, uy) = (un * cx, un * cy);
    if !(rho > 0.0 && rho.is_finite() && un.is_finite()) {
        return false;
    }
    for q in 0..Q {
        let neq = g[q] - equilibrium(q, rho_nb, ux_nb, uy_nb);
        out[q * n + cell] = equilibrium(q, rho, ux, uy) + (1.0 - omega) * neq;
    }
    true
}

/// Reconstructs the populations entering through an open section from the
/// imposed density or normal velocity, with zero tangential velocity.
#[inline]
fn zou_he(fl: &mut [f64; Q], slot: &Slot) {
    let [t, mt, mn, npt, nmt, mnpt, mnmt] = slot.stencil;
    let s0 = fl[0] + fl[t] + fl[mt];
    let sm = fl[mn] + fl[mnpt] + fl[mnmt];
    let un = if slot.pressure {
        slot.value - s0 - 2.0 * sm
    } else {
        slot.value
    };
    let half_t = 0.5 * (fl[t] - fl[mt]);
    fl[slot.normal] = fl[mn] + 2.0 / 3.0 * un;
    fl[npt] = fl[mnmt] - half_t + un / 6.0;
    fl[nmt] = fl[mnpt] + half_t + un / 6.0;
}

/// Physical macroscopic fields of a lattice snapshot.
#[derive(Debug, Clone)]
pub struct Macroscopics {
    pub nx: usize,
    pub ny: usize,
    pub origin: Point,
    pub dx: f64,
    pub(crate) index: Vec<u32>,
    pub(crate) coords: Vec<(u32, u32)>,
    /// Dense cell kinds: 0 wall, 1 fluid, 2 open boundary.
    pub kind: Vec<u8>,
    /// Pa, per fluid cell.
    pub pressure: Vec<f64>,
    /// m/s, per fluid cell.
    pub velocity: Vec<[f64; 2]>,
}

impl Macroscopics {
    pub fn cell_center(&self, cell: usize) -> Point {
        let (i, j) = self.coords[cell];
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.dx,
            self.origin.y + (j as f64 + 0.5) * self.dx,
        )
    }

    pub fn fluid_cells(&self) -> usize {
        self.coords.len()
    }

    /// Fluid cell containing `point`, or the nearest fluid cell when the point
    /// lies in a wall cell. `None` outside the lattice bounding box.
    pub fn nearest_cell(&self, point: Point) -> Option<usize> {
        let fi = (point.x - self.origin.x) / self.dx + 1e-9;
        let fj = (point.y - self.origin.y) / self.dx + 1e-9;
        if fi < 0.0 || fj < 0.0 || fi > self.nx as f64 || fj > self.ny as f64 {
            return None;
        }
        let i = (fi.floor() as usize).min(self.nx - 1);
        let j = (fj.floor() as usize).min(self.ny - 1);
        let k = self.index[j * self.nx + i];
        if k != NONE {
            return Some(k as usize);
        }
        (0..self.coords.len()).min_by(|&a, &b| {
            let da = self.cell_center(a).distance(point);
            let db = self.cell_center(b).distance(point);
            da.total_cmp(&db)
        })
    }

    /// Pressure and velocity at the nearest fluid cell.
    pub fn sample(&self, point: Point) -> Option<(f64, [f64; 2])> {
        self.nearest_cell(point)
            .map(|k| (self.pressure[k], self.velocity[k]))
    }
}
