//! Rendering of the feasible (rho, alpha) region as a cell grid, ASCII art,
//! or static SVG markup. The plot spans rho in [0, 1] on the x-axis and
//! alpha in [0, 1.1 * alpha_max] on the y-axis; a cell is shaded when its
//! center satisfies the closed membership predicate. The rho = 1 right
//! boundary corresponds to the single-latent model and is marked.

use crate::covariance::AlphaBounds;
use crate::parameterization::{is_feasible, FeasiblePoint};

/// Boolean shading grid. `cells[row][col]` with row 0 at the top (largest
/// alpha) and column 0 at rho = 0.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    pub steps: usize,
    pub alpha_hi: f64,
    pub cells: Vec<Vec<bool>>,
}

impl RegionGrid {
    pub fn cell_width(&self) -> f64 {
        1.0 / self.steps as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.alpha_hi / self.steps as f64
    }

    /// rho at the center of column `col`.
    pub fn rho_center(&self, col: usize) -> f64 {
        (col as f64 + 0.5) * self.cell_width()
    }

    /// alpha at the center of row `row` (row 0 on top).
    pub fn alpha_center(&self, row: usize) -> f64 {
        (self.steps as f64 - row as f64 - 0.5) * self.cell_height()
    }
}

/// Evaluate the membership predicate on an `steps x steps` grid of cell
/// centers.
pub fn region_grid(bounds: &AlphaBounds, steps: usize) -> RegionGrid {
    let steps = steps.max(1);
    let alpha_hi = 1.1 * bounds.alpha_max;
    let mut grid = RegionGrid { steps, alpha_hi, cells: vec![vec![false; steps]; steps] };
    for row in 0..steps {
        let alpha = grid.alpha_center(row);
        for col in 0..steps {
            let rho = grid.rho_center(col);
            grid.cells[row][col] = is_feasible(bounds, &FeasiblePoint { rho, alpha });
        }
    }
    grid
}

/// ASCII rendering: '#' feasible, '.' infeasible, '|' for feasible cells in
/// the rightmost (rho = 1) column.
pub fn render_ascii(grid: &RegionGrid, bounds: &AlphaBounds) -> String {
    let mut out = String::new();
    out.push_str(&format!("alpha (top = {:.6})\n", grid.alpha_hi));
    for row in 0..grid.steps {
        for col in 0..grid.steps {
            let ch = if !grid.cells[row][col] {
                '.'
            } else if col == grid.steps - 1 {
                '|'
            } else {
                '#'
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out.push_str("rho: 0 to 1 left to right; '|' marks the rho = 1 single-latent boundary\n");
    out.push_str(&format!(
        "alpha_min = {:.6}, alpha_max = {:.6}, rho_min = {:.6}\n",
        bounds.alpha_min, bounds.alpha_max, bounds.rho_min
    ));
    out
}

/// Static SVG rendering: one rect per feasible cell, axes, and a marked
/// right boundary segment at rho = 1 over [alpha_min, alpha_max]. No
/// scripting.
pub fn render_svg(grid: &RegionGrid, bounds: &AlphaBounds) -> String {
    let size = 480.0;
    let margin = 48.0;
    let plot = size - 2.0 * margin;
    let cell_w = plot / grid.steps as f64;
    let cell_h = plot / grid.steps as f64;
    let x_of = |rho: f64| margin + rho * plot;
    let y_of = |alpha: f64| margin + (1.0 - alpha / grid.alpha_hi) * plot;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {size} {size}\" width=\"{size}\" height=\"{size}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{plot}\" height=\"{plot}\" fill=\"white\" stroke=\"black\"/>\n"
    ));
    for row in 0..grid.steps {
        for col in 0..grid.steps {
            if grid.cells[row][col] {
                let x = margin + col as f64 * cell_w;
                let y = margin + row as f64 * cell_h;
                svg.push_str(&format!(
                    "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{cell_w:.3}\" height=\"{cell_h:.3}\" fill=\"#9db8d9\" stroke=\"none\"/>\n"
                ));
            }
        }
    }
    // Right boundary: the single-latent models.
    svg.push_str(&format!(
        "<line x1=\"{x:.3}\" y1=\"{y1:.3}\" x2=\"{x:.3}\" y2=\"{y2:.3}\" stroke=\"#c0392b\" stroke-width=\"3\"/>\n",
        x = x_of(1.0),
        y1 = y_of(bounds.alpha_min),
        y2 = y_of(bounds.alpha_max),
    ));
    // Corner marker at (rho_min, alpha_max).
    svg.push_str(&format!(
        "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"#c0392b\"/>\n",
        x_of(bounds.rho_min),
        y_of(bounds.alpha_max)
    ));
    svg.push_str(&format!(
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\">rho</text>\n",
        margin + plot / 2.0,
        size - margin / 3.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" transform=\"rotate(-90 {0:.3} {1:.3})\">alpha</text>\n",
        margin / 3.0,
        margin + plot / 2.0
    ));
    for (t, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        svg.push_str(&format!(
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"10\" text-anchor=\"middle\">{label}</text>\n",
            x_of(t),
            size - margin + 14.0
        ));
    }
    for t in [0.25, 0.5, 0.75, 1.0] {
        let alpha = t * grid.alpha_hi;
        svg.push_str(&format!(
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"10\" text-anchor=\"end\">{:.2}</text>\n",
            margin - 4.0,
            y_of(alpha) + 3.0,
            alpha
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\">single-latent boundary (rho = 1)</text>\n",
        margin,
        margin - 8.0
    ));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_bounds() -> AlphaBounds {
        // The worked-example bounds.
        let alpha_min = (2030.0f64).sqrt() / 30.0;
        let alpha_max = 7.0f64.sqrt();
        AlphaBounds { alpha_min, alpha_max, rho_min: alpha_min / alpha_max }
    }

    #[test]
    fn cells_match_membership_predicate() {
        let b = demo_bounds();
        for steps in [2usize, 7, 40] {
            let grid = region_grid(&b, steps);
            for row in 0..steps {
                for col in 0..steps {
                    let expect = is_feasible(
                        &b,
                        &FeasiblePoint { rho: grid.rho_center(col), alpha: grid.alpha_center(row) },
                    );
                    assert_eq!(grid.cells[row][col], expect);
                }
            }
        }
    }

    #[test]
    fn two_step_grid_shades_only_right_column() {
        let grid = region_grid(&demo_bounds(), 2);
        let shaded: Vec<(usize, usize)> = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .filter(|&(r, c)| grid.cells[r][c])
            .collect();
        assert_eq!(shaded, vec![(0, 1)]);
    }

    #[test]
    fn ascii_has_boundary_marks_and_matches_grid() {
        let b = demo_bounds();
        let grid = region_grid(&b, 40);
        let art = render_ascii(&grid, &b);
        let rows: Vec<&str> = art
            .lines()
            .filter(|l| l.chars().all(|c| matches!(c, '.' | '#' | '|')) && !l.is_empty())
            .collect();
        assert_eq!(rows.len(), 40);
        for (r, line) in rows.iter().enumerate() {
            for (c, ch) in line.chars().enumerate() {
                assert_eq!(ch != '.', grid.cells[r][c], "cell ({r}, {c})");
            }
        }
        assert!(art.contains('|'));
    }

    #[test]
    fn svg_is_static_markup() {
        let b = demo_bounds();
        let grid = region_grid(&b, 12);
        let svg = render_svg(&grid, &b);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("single-latent boundary"));
        assert!(!svg.contains("<script"));
        let rect_count = svg.matches("<rect").count();
        let feasible: usize = grid.cells.iter().flatten().filter(|&&c| c).count();
        assert_eq!(rect_count, feasible + 1); // background + one per feasible cell
    }
}
