//! Deterministic strategy sampling.
//!
//! Sampling is the desk-scale stand-in for the paper-style "for all z in K"
//! quantifiers on continuous games. Draws use a counter-based ChaCha stream
//! so the same seed reproduces the same samples on every platform, and every
//! run force-includes the structurally interesting points: the origin when
//! the spaces contain it, the box corners (capped), and box midpoints.
//! Finite joint spaces are enumerated exhaustively whenever they fit the
//! requested count.
//!
//! Half-open boxes keep a margin of `1e-3 * (hi - lo)` away from their open
//! faces so that strict-domain expressions stay evaluable.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{ActionSpace, GameSpec, JointStrategy};

/// Margin factor kept from the open faces of half-open boxes.
pub const OPEN_FACE_MARGIN: f64 = 1e-3;

/// Corner enumeration cap.
const CORNER_CAP: usize = 1 << 10;

/// Derives an independent stream seed; splitmix64 finalizer.
pub(crate) fn subseed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(tag.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn effective_lo(lo: &[f64], hi: &[f64], open_lo: bool) -> Vec<f64> {
    lo.iter()
        .zip(hi)
        .map(|(&l, &h)| {
            if open_lo {
                l + OPEN_FACE_MARGIN * (h - l)
            } else {
                l
            }
        })
        .collect()
}

fn random_action(space: &ActionSpace, rng: &mut ChaCha8Rng, radius: f64) -> Vec<f64> {
    match space {
        ActionSpace::Finite { points } => points[rng.gen_range(0..points.len())].clone(),
        ActionSpace::Box { lo, hi, open_lo } => {
            let lo = effective_lo(lo, hi, *open_lo);
            lo.iter()
                .zip(hi)
                .map(|(&l, &h)| if l == h { l } else { rng.gen_range(l..=h) })
                .collect()
        }
        ActionSpace::All { dim } => (0..*dim).map(|_| rng.gen_range(-radius..=radius)).collect(),
    }
}

fn push_unique(out: &mut Vec<JointStrategy>, s: JointStrategy) {
    if !out.contains(&s) {
        out.push(s);
    }
}

/// Samples joint strategies.
///
/// Returns the samples and whether they exhaust the joint action set (only
/// possible for finite games whose profile count fits in `count`).
pub fn sample_strategies(
    g: &GameSpec,
    count: usize,
    seed: u64,
    radius: f64,
) -> (Vec<JointStrategy>, bool) {
    if g.is_finite() {
        if let Some(total) = g.profile_count() {
            if total <= count.max(1) as u128 {
                return (g.enumerate_profiles().expect("finite game"), true);
            }
            if total <= u32::MAX as u128 {
                // uniform without replacement over the joint profiles
                let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, 0xF1417E));
                let counts: Vec<usize> = g
                    .spaces()
                    .iter()
                    .map(|s| s.point_count().expect("finite game"))
                    .collect();
                let mut chosen: Vec<usize> =
                    rand::seq::index::sample(&mut rng, total as usize, count)
                        .into_iter()
                        .collect();
                chosen.sort_unstable();
                let out = chosen
                    .into_iter()
                    .map(|flat| {
                        let mut idx = vec![0usize; counts.len()];
                        let mut rest = flat;
                        for k in (0..counts.len()).rev() {
                            idx[k] = rest % counts[k];
                            rest /= counts[k];
                        }
                        g.profile_from_indices(&idx).expect("in-range indices")
                    })
                    .collect();
                return (out, false);
            }
        }
    }

    let mut out: Vec<JointStrategy> = Vec::new();

    if g.spaces().iter().all(|s| s.contains_zero()) {
        push_unique(&mut out, JointStrategy::zeros(g.dims()));
    }

    let all_boxes = g
        .spaces()
        .iter()
        .all(|s| matches!(s, ActionSpace::Box { .. }));
    if all_boxes {
        // joint corners, lexicographic, capped
        let bounds: Vec<(Vec<f64>, Vec<f64>)> = g
            .spaces()
            .iter()
            .map(|s| match s {
                ActionSpace::Box { lo, hi, open_lo } => {
                    (effective_lo(lo, hi, *open_lo), hi.clone())
                }
                _ => unreachable!(),
            })
            .collect();
        let total_coords: usize = g.dims().iter().sum();
        let corner_count = if total_coords >= 20 {
            CORNER_CAP
        } else {
            (1usize << total_coords).min(CORNER_CAP)
        };
        for mask in 0..corner_count {
            let mut actions = Vec::with_capacity(g.players());
            let mut bit = 0;
            for (lo, hi) in &bounds {
                let mut a = Vec::with_capacity(lo.len());
                for c in 0..lo.len() {
                    let hi_side = (mask >> bit) & 1 == 1;
                    a.push(if hi_side { hi[c] } else { lo[c] });
                    bit += 1;
                }
                actions.push(a);
            }
            push_unique(&mut out, JointStrategy(actions));
        }
        // joint midpoint
        let mid = JointStrategy(
            bounds
                .iter()
                .map(|(lo, hi)| lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect())
                .collect(),
        );
        push_unique(&mut out, mid);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, 0x5A4D));
    while out.len() < count {
        let actions = g
            .spaces()
            .iter()
            .map(|s| random_action(s, &mut rng, radius))
            .collect();
        out.push(JointStrategy(actions));
    }
    (out, false)
}

/// Samples one player's actions: all finite points when they fit, otherwise
/// endpoints/zero/midpoint specials plus uniform fill.
pub fn sample_actions(
    g: &GameSpec,
    player: usize,
    count: usize,
    seed: u64,
    radius: f64,
) -> Vec<Vec<f64>> {
    let space = g.space(player);
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, 0xAC71 ^ player as u64));
    match space {
        ActionSpace::Finite { points } => {
            if points.len() <= count.max(1) {
                points.clone()
            } else {
                let idx = rand::seq::index::sample(&mut rng, points.len(), count);
                let mut chosen: Vec<usize> = idx.into_iter().collect();
                chosen.sort_unstable();
                chosen.into_iter().map(|i| points[i].clone()).collect()
            }
        }
        ActionSpace::Box { lo, hi, open_lo } => {
            let lo_eff = effective_lo(lo, hi, *open_lo);
            let mut out: Vec<Vec<f64>> = Vec::new();
            let n = lo.len();
            if n <= 6 {
                for mask in 0..(1usize << n) {
                    let corner: Vec<f64> = (0..n)
                        .map(|c| {
                            if (mask >> c) & 1 == 1 {
                                hi[c]
                            } else {
                                lo_eff[c]
                            }
                        })
                        .collect();
                    if !out.contains(&corner) {
                        out.push(corner);
                    }
                }
            }
            if space.contains_zero() {
                let zero = vec![0.0; n];
                if !out.contains(&zero) {
                    out.push(zero);
                }
            }
            let mid: Vec<f64> = lo_eff.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect();
            if !out.contains(&mid) {
                out.push(mid);
            }
            while out.len() < count {
                out.push(random_action(space, &mut rng, radius));
            }
            out
        }
        ActionSpace::All { dim } => {
            let mut out = vec![vec![0.0; *dim]];
            while out.len() < count {
                out.push(random_action(space, &mut rng, radius));
            }
            out
        }
    }
}
