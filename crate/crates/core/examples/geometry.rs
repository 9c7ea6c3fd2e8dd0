//! Waveguide scalars, the near-field distance expansion and a synthesized
//! channel for a fixed scene.

use pinching_csi::geometry::{
    fresnel_critical_count, path_gains, second_order_term, synthesize_channel, Polar, Scatterer, Scene,
    WaveguideConfig,
};

fn main() -> pinching_csi::Result<()> {
    let cfg = WaveguideConfig::default();
    println!("wavelength     {:.6} m", cfg.wavelength());
    println!("antennas       {}", cfg.antenna_count());
    println!("Fresnel count  {} at 50 m", fresnel_critical_count(&cfg, 50.0));
    for m in [40usize, 400] {
        let x = m as f64 * cfg.wavelength() / 2.0;
        println!("2nd-order term {:.5} m at x = {m}λ/2, r = 10 m", second_order_term(10.0, 0.0, x));
    }

    let scene = Scene::new(
        Polar::new(5.0, 0.3),
        vec![
            Scatterer { position: Polar::new(8.0, -0.6), rcs_m2: 1.0 },
            Scatterer { position: Polar::new(3.0, 0.9), rcs_m2: 1.0 },
        ],
    )?;
    for p in path_gains(&cfg, &scene).iter() {
        println!("{:?} r = {:.2} m, φ = {:+.3} rad, |β| = {:.3e}", p.kind, p.distance_m, p.angle_rad, p.gain.norm());
    }
    let h = synthesize_channel(&cfg, &scene);
    println!("‖h‖² = {:.4e}, |h_1| = {:.3e}, |h_M| = {:.3e}", h.norm_sqr(), h[0].norm(), h[h.len() - 1].norm());
    Ok(())
}
