//! SVG rendering of a tile map at real-world scale.
//!
//! One user unit is one meter. Each tile is a `<rect>` sized by its row height
//! and column width; directional tiles get a short `<line>` from the tile
//! centre toward their orientation. A legend group sits below the plan.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::Dir;
use crate::tiler::{TileKind, TileMap};

pub fn color(kind: TileKind) -> &'static str {
    match kind {
        TileKind::Crossroads => "#4d4d4d",
        TileKind::TJunction => "#666666",
        TileKind::Straight => "#808080",
        TileKind::Park1 => "#2e7d32",
        TileKind::Park2 => "#66bb6a",
        TileKind::Park3 => "#c5e1a5",
        TileKind::Free => "#f5f5dc",
        TileKind::Entrance => "#1565c0",
        TileKind::Exit => "#c62828",
        TileKind::Obstacle => "#212121",
    }
}

const LEGEND_ROW: f64 = 1.5;

fn num(x: f64) -> String {
    // trims trailing zeros while staying exact for typical widths
    let s = format!("{x:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn render_svg(t: &TileMap, row_widths: &[f64], col_widths: &[f64]) -> Result<String> {
    if row_widths.len() != t.h {
        return Err(Error::DimensionMismatch { field: "row_widths", expected: t.h, found: row_widths.len() });
    }
    if col_widths.len() != t.w {
        return Err(Error::DimensionMismatch { field: "col_widths", expected: t.w, found: col_widths.len() });
    }
    if row_widths.iter().chain(col_widths).any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidConfig("tile widths must be positive".into()));
    }

    let total_w: f64 = col_widths.iter().sum();
    let total_h: f64 = row_widths.iter().sum();
    let legend_h = LEGEND_ROW * (TileKind::ALL.len() as f64 + 1.0);
    let view_h = total_h + legend_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {} {}" width="{}m" height="{}m">"#,
        num(total_w),
        num(view_h),
        num(total_w),
        num(view_h)
    );
    out.push_str("<g id=\"tiles\">\n");
    let mut y = 0.0;
    for (r, &rh) in row_widths.iter().enumerate() {
        let mut x = 0.0;
        for (c, &cw) in col_widths.iter().enumerate() {
            let tile = t.tiles[r * t.w + c];
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" class="{}"/>"#,
                num(x),
                num(y),
                num(cw),
                num(rh),
                color(tile.kind),
                tile.kind.as_str()
            );
            if tile.kind.is_directional() {
                let (cx, cy) = (x + cw / 2.0, y + rh / 2.0);
                let (dx, dy) = match tile.orientation {
                    Dir::N => (0.0, -rh * 0.4),
                    Dir::S => (0.0, rh * 0.4),
                    Dir::E => (cw * 0.4, 0.0),
                    Dir::W => (-cw * 0.4, 0.0),
                };
                let _ = writeln!(
                    out,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="white" stroke-width="0.15"/>"#,
                    num(cx),
                    num(cy),
                    num(cx + dx),
                    num(cy + dy)
                );
            }
            x += cw;
        }
        y += rh;
    }
    out.push_str("</g>\n<g id=\"legend\" font-size=\"1\" font-family=\"sans-serif\">\n");
    for (i, kind) in TileKind::ALL.into_iter().enumerate() {
        let ly = total_h + LEGEND_ROW * (i as f64 + 1.0);
        let _ = writeln!(
            out,
            r#"<text x="0" y="{}" fill="{}">{}</text>"#,
            num(ly),
            color(kind),
            kind.as_str()
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StructureMatrix;
    use crate::tiler::tile_map;

    #[test]
    fn single_lane_tile() {
        let s = StructureMatrix::from_codes(&[[1]]).unwrap();
        let svg = render_svg(&tile_map(&s), &[5.5], &[5.5]).unwrap();
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains("<g id=\"legend\""));
        assert_eq!(svg.matches("<text").count(), TileKind::ALL.len());
    }

    #[test]
    fn deterministic() {
        let s = StructureMatrix::from_codes(&[[2, 1, 0], [0, 1, 3]]).unwrap();
        let t = tile_map(&s);
        let a = render_svg(&t, &[2.0, 3.0], &[1.0, 2.5, 4.0]).unwrap();
        let b = render_svg(&t, &[2.0, 3.0], &[1.0, 2.5, 4.0]).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(r#"viewBox="0 0 7.5 "#));
    }

    #[test]
    fn mismatched_dims() {
        let t = tile_map(&StructureMatrix::from_codes(&[[0, 0]]).unwrap());
        assert!(matches!(render_svg(&t, &[1.0, 1.0], &[1.0, 1.0]), Err(Error::DimensionMismatch { field: "row_widths", .. })));
        assert!(matches!(render_svg(&t, &[1.0], &[1.0]), Err(Error::DimensionMismatch { field: "col_widths", .. })));
        assert!(render_svg(&t, &[1.0], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(num(5.5), "5.5");
        assert_eq!(num(11.0), "11");
        assert_eq!(num(0.125), "0.125");
    }
}
