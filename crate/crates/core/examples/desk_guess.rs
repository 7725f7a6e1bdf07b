//! Writes a one-peak initial guess `u₀(x₁) = −A sech²(x₁/w)` on the
//! desk-scale domain, periodized over `2d₁`.
//!
//! ```text
//! cargo run -p bridgewave --example desk_guess -- OUT [D1] [N1] [N2]
//! ```
//!
//! `D1` defaults to `π/0.1`, the box to `(80, 4)`.

use bridgewave::fft;
use bridgewave::sequences::IndexBox;
use std::f64::consts::PI;
use std::path::PathBuf;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out: PathBuf = args
        .first()
        .cloned()
        .unwrap_or_else(|| "desk_guess.json".into())
        .into();
    let num = |i: usize, default: f64| args.get(i).map_or(default, |s| s.parse().expect("number"));
    let (d1, d2) = (num(1, PI / 0.1), PI / 0.24);
    let (amp, width) = (2.0, 2.0);
    let bx = IndexBox::new(num(2, 80.0) as usize, num(3, 4.0) as usize);
    let m = 1024;
    let g: Vec<f64> = (0..m)
        .flat_map(|i| {
            let x = 2.0 * d1 * i as f64 / m as f64;
            let v: f64 = (-2..=2)
                .map(|k| {
                    let s = (x - 2.0 * d1 * k as f64) / width;
                    -amp / s.cosh().powi(2)
                })
                .sum();
            std::iter::repeat(v).take(128)
        })
        .collect();
    let u = fft::analyze(&g, m, 128, bx, d1, d2);
    u.write_file(&out, "1.2").expect("write guess");
    println!("wrote {}", out.display());
}
