//! Per-run profile CSV: fixed column order `coordinate,u,V,f`, header
//! mandatory, hard-wall entries written as the literal token `inf`.

use potopt_core::{Field, CLAMP};

pub fn profile_csv(u: &Field, potential: &Field, mask: &[bool], f: &Field) -> String {
    let grid = u.grid();
    let mut out = String::from("coordinate,u,V,f\n");
    for i in 0..grid.n() {
        let v = potential.values()[i];
        let vtok = if v >= CLAMP || !mask[i] {
            "inf".to_string()
        } else {
            format!("{v}")
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            grid.node(i),
            u.values()[i],
            vtok,
            f.values()[i]
        ));
    }
    out
}
