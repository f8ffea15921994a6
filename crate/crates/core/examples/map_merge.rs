//! Aligns two partial maps expressed in different frames, merges them, and
//! writes the four-panel overlay.
//!
//! cargo run --example map_merge -- [seed] [out.svg]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semnav::alignment::{align_maps, merge_maps, AlignmentConfig};
use semnav::harness::fixtures::{alignment_fixture, FixtureConfig};
use semnav::harness::render_merge_overlay;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("semnav-merge.svg").display().to_string());

    let fx = alignment_fixture(seed, &FixtureConfig::default());
    println!("true transform: theta {:.1} deg, t ({:.2}, {:.2}) m, overlap {:.0}%", fx.truth.theta.to_degrees(), fx.truth.tx, fx.truth.ty, fx.overlap * 100.0);

    let cfg = AlignmentConfig::default();
    let r = align_maps(&fx.map_a, &fx.reg_a, &fx.map_b, &fx.reg_b, &cfg, &mut ChaCha8Rng::seed_from_u64(seed))?;
    println!(
        "estimate:       theta {:.1} deg, t ({:.2}, {:.2}) m, {} inliers, IoU {:.2} over {} cells, accepted {}",
        r.transform.theta.to_degrees(),
        r.transform.tx,
        r.transform.ty,
        r.inlier_count,
        r.iou,
        r.overlap,
        r.accepted
    );
    println!(
        "error: {:.2} deg, {:.3} m",
        r.transform.rotation_error(&fx.truth).to_degrees(),
        r.transform.translation_error(&fx.truth)
    );
    if !r.accepted {
        return Ok(());
    }

    let mut merged = fx.map_a.clone();
    merge_maps(&mut merged, &fx.map_b, &r.transform);
    println!("explored cells: A {}, B {}, merged {}", fx.map_a.explored_count(), fx.map_b.explored_count(), merged.explored_count());
    render_merge_overlay(&fx.map_a, &fx.map_b, &r.transform, out.as_ref())?;
    println!("wrote {out}");
    Ok(())
}
