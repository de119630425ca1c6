use super::Macroscopics;
use std::fmt::Write as _;

impl Macroscopics {
    /// `x,y,pressure_pa,ux,uy` for every fluid cell, row by row from the
    /// bottom, six significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,pressure_pa,ux,uy\n");
        for k in 0..self.fluid_cells() {
            let c = self.cell_center(k);
            let [ux, uy] = self.velocity[k];
            let _ = writeln!(
                out,
                "{:.5e},{:.5e},{:.5e},{:.5e},{:.5e}",
                c.x, c.y, self.pressure[k], ux, uy
            );
        }
        out
    }

    /// Legacy ASCII VTK structured-points file with one point per cell
    /// centre; wall cells carry zeros.
    pub fn to_vtk(&self) -> String {
        let n = self.nx * self.ny;
        let dense = |k: usize| self.index[k];
        let mut out = String::new();
        let _ = writeln!(out, "# vtk DataFile Version 3.0");
        let _ = writeln!(out, "lattice macroscopic fields");
        let _ = writeln!(out, "ASCII");
        let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
        let _ = writeln!(out, "DIMENSIONS {} {} 1", self.nx, self.ny);
        let _ = writeln!(
            out,
            "ORIGIN {:.9e} {:.9e} 0",
            self.origin.x + self.dx / 2.0,
            self.origin.y + self.dx / 2.0
        );
        let _ = writeln!(
            out,
            "SPACING {:.9e} {:.9e} {:.9e}",
            self.dx, self.dx, self.dx
        );
        let _ = writeln!(out, "POINT_DATA {n}");
        let _ = writeln!(out, "SCALARS pressure_pa double 1");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for k in 0..n {
            let v = match dense(k) {
                u32::MAX => 0.0,
                c => self.pressure[c as usize],
            };
            let _ = writeln!(out, "{v:.6e}");
        }
        let _ = writeln!(out, "VECTORS velocity double");
        for k in 0..n {
            let [ux, uy] = match dense(k) {
                u32::MAX => [0.0, 0.0],
                c => self.velocity[c as usize],
            };
            let _ = writeln!(out, "{ux:.6e} {uy:.6e} 0");
        }
        let _ = writeln!(out, "SCALARS cell_kind int 1");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for k in 0..n {
            let _ = writeln!(out, "{}", self.kind[k]);
        }
        out
    }
}
