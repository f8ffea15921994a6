use rand::Rng;

use super::{AlignError, CandidateSource, PointPair, RigidTransform2D};

#[derive(Debug, Clone, PartialEq)]
pub struct TransformEstimate {
    /// Maps frame B points onto frame A.
    pub transform: RigidTransform2D,
    /// Indices into the candidate list.
    pub inliers: Vec<usize>,
}

/// Least-squares rotation and translation taking each `b` onto its `a`.
pub fn fit_rigid(pairs: &[((f64, f64), (f64, f64))]) -> Option<RigidTransform2D> {
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len() as f64;
    let (mut ax, mut ay, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0);
    for (a, b) in pairs {
        ax += a.0;
        ay += a.1;
        bx += b.0;
        by += b.1;
    }
    let (ax, ay, bx, by) = (ax / n, ay / n, bx / n, by / n);
    let (mut sin, mut cos) = (0.0, 0.0);
    for (a, b) in pairs {
        let (pa, pb) = ((a.0 - ax, a.1 - ay), (b.0 - bx, b.1 - by));
        cos += pb.0 * pa.0 + pb.1 * pa.1;
        sin += pb.0 * pa.1 - pb.1 * pa.0;
    }
    if sin == 0.0 && cos == 0.0 {
        return None;
    }
    let theta = sin.atan2(cos);
    let rot = RigidTransform2D::new(theta, 0.0, 0.0);
    let (rx, ry) = rot.rotate((bx, by));
    Some(RigidTransform2D::new(theta, ax - rx, ay - ry))
}

fn residual(t: &RigidTransform2D, p: &PointPair) -> f64 {
    let q = t.apply(p.b);
    (q.0 - p.a.0).hypot(q.1 - p.a.1)
}

fn consensus(t: &RigidTransform2D, cands: &[PointPair], eps: f64) -> (Vec<usize>, f64) {
    let mut inliers = Vec::new();
    let mut total = 0.0;
    for (i, p) in cands.iter().enumerate() {
        let r = residual(t, p);
        if r <= eps {
            inliers.push(i);
            total += r;
        }
    }
    (inliers, total)
}

/// RANSAC over two-pair samples followed by a least-squares refit.
pub fn estimate_transform<R: Rng + ?Sized>(
    cands: &[PointPair],
    iterations: usize,
    eps_in: f64,
    k_min: usize,
    rng: &mut R,
) -> Result<TransformEstimate, AlignError> {
    if cands.len() < 2 {
        return Err(AlignError::InsufficientCandidates(cands.len()));
    }
    let mut best: Option<(Vec<usize>, usize, f64)> = None;
    for _ in 0..iterations {
        let i = rng.random_range(0..cands.len());
        let mut j = rng.random_range(0..cands.len() - 1);
        if j >= i {
            j += 1;
        }
        let (p, q) = (&cands[i], &cands[j]);
        let la = (p.a.0 - q.a.0).hypot(p.a.1 - q.a.1);
        let lb = (p.b.0 - q.b.0).hypot(p.b.1 - q.b.1);
        // A rigid motion preserves the pair separation.
        if la < eps_in || (la - lb).abs() > 2.0 * eps_in {
            continue;
        }
        let Some(t) = fit_rigid(&[(p.a, p.b), (q.a, q.b)]) else { continue };
        let (inl, total) = consensus(&t, cands, eps_in);
        let w = weight(cands, &inl);
        let better = match &best {
            None => true,
            Some((b, bw, bt)) => w > *bw || (w == *bw && (inl.len() > b.len() || (inl.len() == b.len() && total < *bt))),
        };
        if better {
            best = Some((inl, w, total));
        }
    }
    let Some((inliers, _, _)) = best else {
        return Err(AlignError::Failure { best_consensus: 0 });
    };
    if inliers.len() < k_min {
        return Err(AlignError::Failure { best_consensus: inliers.len() });
    }
    refine(cands, &inliers, eps_in, k_min).ok_or(AlignError::Failure { best_consensus: inliers.len() })
}

/// Landmark pairs carry category agreement that corners lack.
const LANDMARK_WEIGHT: usize = 5;

fn weight(cands: &[PointPair], inliers: &[usize]) -> usize {
    inliers
        .iter()
        .map(|&k| if cands[k].source == CandidateSource::Landmark { LANDMARK_WEIGHT } else { 1 })
        .sum()
}

fn refine(cands: &[PointPair], inliers: &[usize], eps_in: f64, k_min: usize) -> Option<TransformEstimate> {
    let refit = |idx: &[usize]| fit_rigid(&idx.iter().map(|&k| (cands[k].a, cands[k].b)).collect::<Vec<_>>());
    let mut transform = refit(inliers)?;
    let (mut final_inliers, _) = consensus(&transform, cands, eps_in);
    if final_inliers.len() >= k_min && final_inliers != inliers {
        if let Some(t) = refit(&final_inliers) {
            transform = t;
            final_inliers = consensus(&transform, cands, eps_in).0;
        }
    }
    if final_inliers.len() < k_min {
        return None;
    }
    // Trimmed refits until the tight set settles: near-miss inliers bias the
    // rotation on short baselines.
    let mut tight_prev: Vec<usize> = Vec::new();
    for _ in 0..8 {
        let (tight, _) = consensus(&transform, cands, eps_in / 3.0);
        if tight.len() < 3 || tight == tight_prev {
            break;
        }
        let Some(t) = refit(&tight) else { break };
        let (loose, _) = consensus(&t, cands, eps_in);
        if loose.len() < k_min {
            break;
        }
        transform = t;
        final_inliers = loose;
        tight_prev = tight;
    }
    Some(TransformEstimate { transform, inliers: final_inliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(a: (f64, f64), b: (f64, f64)) -> PointPair {
        PointPair { a, b, descriptor_distance: 0.0, source: CandidateSource::Corner }
    }

    fn exact_pairs(t: &RigidTransform2D, n: usize) -> Vec<PointPair> {
        (0..n)
            .map(|k| {
                let b = ((k as f64 * 1.7) % 5.0, (k as f64 * 2.3) % 7.0 - 1.0);
                pair(t.apply(b), b)
            })
            .collect()
    }

    #[test]
    fn noiseless_recovery() {
        let truth = RigidTransform2D::new(std::f64::consts::FRAC_PI_2, 3.0, -1.0);
        let c = exact_pairs(&truth, 10);
        let est = estimate_transform(&c, 500, 0.375, 4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(est.transform.rotation_error(&truth) < 1e-6);
        assert!(est.transform.translation_error(&truth) < 1e-6);
        assert_eq!(est.inliers.len(), 10);
    }

    #[test]
    fn outliers_are_excluded() {
        let truth = RigidTransform2D::new(0.7, -2.0, 4.0);
        let mut c = exact_pairs(&truth, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
            let b = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
            c.push(pair(a, b));
        }
        let est = estimate_transform(&c, 500, 0.375, 4, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(est.transform.rotation_error(&truth) < 1e-6);
        assert!(est.transform.translation_error(&truth) < 1e-6);
        assert_eq!(est.inliers, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn inconsistent_triple_fails() {
        let c = vec![pair((0.0, 0.0), (0.0, 0.0)), pair((5.0, 0.0), (0.0, 1.0)), pair((0.0, 9.0), (3.0, 3.0))];
        let r = estimate_transform(&c, 500, 0.375, 4, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(matches!(r, Err(AlignError::Failure { .. })));
    }
}
