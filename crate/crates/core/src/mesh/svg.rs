use std::fmt::Write as _;

use super::{EdgeTag, TriangleMesh};

/// SVG drawing of the mesh: grey cells, red Robin walls, blue artificial boundary.
pub fn mesh_svg(mesh: &TriangleMesh, width_px: f64) -> String {
    let (mut lo, mut hi) = (mesh.nodes[0], mesh.nodes[0]);
    for p in &mesh.nodes {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
    let scale = width_px / span;
    let height = (hi.y - lo.y) * scale;
    let map = |i: usize| {
        let p = mesh.nodes[i];
        ((p.x - lo.x) * scale, height - (p.y - lo.y) * scale)
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        width_px,
        height.ceil(),
        width_px,
        height
    );
    let _ = writeln!(out, r##"<g fill="none" stroke="#999" stroke-width="0.3">"##);
    for t in &mesh.triangles {
        let pts: Vec<String> = t
            .iter()
            .map(|&i| {
                let (x, y) = map(i);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" "));
    }
    let _ = writeln!(out, "</g>");
    for e in &mesh.boundary {
        let (x1, y1) = map(e.nodes[0]);
        let (x2, y2) = map(e.nodes[1]);
        let colour = match e.tag {
            EdgeTag::RobinWall(_) => "#c00",
            EdgeTag::Artificial => "#00c",
        };
        let _ = writeln!(
            out,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{colour}" stroke-width="1"/>"#
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}
