//! Synthetic pieces and features.
//!
//! Notes arrive as a Poisson process with uniform labels and uniform
//! durations, at arbitrary real-valued times. Features are rendered from the
//! continuous-time annotation sampled at frame centers, so any labeling
//! function other than an exact one disagrees with the features somewhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::annotation::{Annotation, NoteEvent};
use crate::error::{Error, Result};
use crate::quantize::FrameGrid;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub num_pieces: usize,
    pub piece_duration_sec: f64,
    pub num_labels: usize,
    /// Mean note onsets per second.
    pub note_rate_per_sec: f64,
    pub duration_range: (f64, f64),
    pub feature_dim: usize,
    pub noise_sigma: f64,
    pub harmonics: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_pieces: 40,
            piece_duration_sec: 30.0,
            num_labels: 12,
            note_rate_per_sec: 2.0,
            duration_range: (0.1, 1.0),
            feature_dim: 48,
            noise_sigma: 0.1,
            harmonics: 3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn check(&self) -> Result<()> {
        let (d_min, d_max) = self.duration_range;
        let problem = if !(d_min > 0.0 && d_max >= d_min && d_max.is_finite()) {
            Some(format!("invalid duration range [{d_min}, {d_max}]"))
        } else if self.num_labels == 0 || self.feature_dim < self.num_labels {
            Some(format!(
                "feature_dim {} must be at least num_labels {} > 0",
                self.feature_dim, self.num_labels
            ))
        } else if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            Some(format!("invalid noise_sigma {}", self.noise_sigma))
        } else if !(self.note_rate_per_sec > 0.0 && self.note_rate_per_sec.is_finite()) {
            Some(format!("invalid note rate {}", self.note_rate_per_sec))
        } else if !(self.piece_duration_sec > 0.0 && self.piece_duration_sec.is_finite()) {
            Some(format!(
                "invalid piece duration {}",
                self.piece_duration_sec
            ))
        } else if self.harmonics == 0 {
            Some("harmonics must be at least 1".into())
        } else {
            None
        };
        problem.map_or(Ok(()), |p| Err(Error::contract(p)))
    }

    /// Seed for piece `index`, derived from the corpus seed.
    pub fn piece_seed(&self, index: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(index as u64 + 1))
    }

    /// Seed of the feature noise for piece `index`.
    pub fn noise_seed(&self, index: usize) -> u64 {
        !self.piece_seed(index)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn generate_corpus(cfg: &SynthConfig) -> Result<Vec<Annotation>> {
    cfg.check()?;
    (0..cfg.num_pieces)
        .map(|i| generate_piece(cfg, cfg.piece_seed(i)))
        .collect()
}

pub fn generate_piece(cfg: &SynthConfig, seed: u64) -> Result<Annotation> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = Exp::new(cfg.note_rate_per_sec).map_err(|e| Error::contract(e.to_string()))?;
    let (d_min, d_max) = cfg.duration_range;
    let end = cfg.piece_duration_sec;

    let mut events = Vec::new();
    let mut t = gaps.sample(&mut rng);
    while t < end {
        let label = rng.random_range(0..cfg.num_labels);
        let d = if d_max > d_min {
            rng.random_range(d_min..d_max)
        } else {
            d_min
        };
        events.push(NoteEvent::new(t, (t + d).min(end), label));
        t += gaps.sample(&mut rng);
    }
    Annotation::new(events, cfg.num_labels, end)
}

/// A T×B' real matrix on a frame grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    values: Vec<T>,
    dim: usize,
    grid: FrameGrid,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn zeros(grid: FrameGrid, dim: usize) -> Self {
        FeatureMatrix {
            values: vec![T::zero(); grid.num_frames() * dim],
            dim,
            grid,
        }
    }

    pub fn from_vec(grid: FrameGrid, dim: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.num_frames() * dim {
            return Err(Error::contract(format!(
                "{} values for a {}x{dim} feature matrix",
                values.len(),
                grid.num_frames()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("feature values must be finite"));
        }
        Ok(FeatureMatrix { values, dim, grid })
    }

    pub fn grid(&self) -> &FrameGrid {
        &self.grid
    }

    pub fn num_frames(&self) -> usize {
        self.grid.num_frames()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> &[T] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Spectral-like template of label `k`: weight `1/h` on bin `f*h` for harmonics
/// `h = 1..=H`, where `f = floor(k*B'/K)`. Bins past `B'` are dropped; where two
/// harmonics land on one bin the lower harmonic keeps it.
pub fn template<T: Scalar>(label: usize, cfg: &SynthConfig) -> Vec<T> {
    let b = cfg.feature_dim;
    let fundamental = label * b / cfg.num_labels;
    let mut p = vec![T::zero(); b];
    for h in 1..=cfg.harmonics {
        let bin = fundamental * h;
        if bin < b && p[bin] == T::zero() {
            p[bin] = T::one() / T::from_count(h as u64);
        }
    }
    p
}

/// Renders with noise drawn from `cfg.seed`.
pub fn render_features<T: Scalar>(
    a: &Annotation,
    grid: FrameGrid,
    cfg: &SynthConfig,
) -> Result<FeatureMatrix<T>> {
    render_features_seeded(a, grid, cfg, cfg.seed)
}

/// Row `t` sums the templates of every label active at `(t + 0.5) * dt`, plus
/// Gaussian noise of standard deviation `cfg.noise_sigma` drawn from `noise_seed`.
pub fn render_features_seeded<T: Scalar>(
    a: &Annotation,
    grid: FrameGrid,
    cfg: &SynthConfig,
    noise_seed: u64,
) -> Result<FeatureMatrix<T>> {
    cfg.check()?;
    if a.num_labels() > cfg.num_labels {
        return Err(Error::contract(format!(
            "annotation has {} labels, synth config {}",
            a.num_labels(),
            cfg.num_labels
        )));
    }
    if grid.duration_sec() + 1e-9 < a.duration_sec() {
        return Err(Error::contract(format!(
            "grid of {} s does not cover the {} s annotation",
            grid.duration_sec(),
            a.duration_sec()
        )));
    }

    let templates: Vec<Vec<T>> = (0..cfg.num_labels).map(|k| template(k, cfg)).collect();
    let mut out = FeatureMatrix::zeros(grid, cfg.feature_dim);
    let mut active = vec![false; cfg.num_labels];
    let dt = grid.dt();
    let events = a.events();
    // Events are sorted by onset; everything before `next` has started.
    let mut next = 0;
    let mut started: Vec<usize> = Vec::new();

    for t in 0..grid.num_frames() {
        let center = (t as f64 + 0.5) * dt;
        while next < events.len() && events[next].onset_sec <= center {
            started.push(next);
            next += 1;
        }
        started.retain(|&i| events[i].offset_sec > center);
        active.iter_mut().for_each(|x| *x = false);
        for &i in &started {
            active[events[i].label] = true;
        }
        let row = &mut out.values[t * cfg.feature_dim..(t + 1) * cfg.feature_dim];
        for (k, _) in active.iter().enumerate().filter(|(_, on)| **on) {
            for (x, &p) in row.iter_mut().zip(&templates[k]) {
                *x += p;
            }
        }
    }

    if cfg.noise_sigma > 0.0 {
        let normal =
            Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::contract(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        for x in out.values.iter_mut() {
            *x += T::from_f64_lossy(normal.sample(&mut rng));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> SynthConfig {
        SynthConfig {
            noise_sigma: 0.0,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn generated_events_stay_inside_the_piece() {
        let cfg = SynthConfig {
            num_pieces: 20,
            piece_duration_sec: 2.0,
            note_rate_per_sec: 0.5,
            duration_range: (0.5, 1.5),
            ..SynthConfig::default()
        };
        for a in generate_corpus(&cfg).unwrap() {
            assert_eq!(a.duration_sec(), 2.0);
            for e in a.events() {
                assert!(e.offset_sec <= 2.0 && e.onset_sec < e.offset_sec);
            }
            assert!(crate::annotation::validate(&a).is_ok());
        }
    }

    #[test]
    fn corpus_is_deterministic_and_seed_sensitive() {
        let cfg = SynthConfig {
            num_pieces: 3,
            ..SynthConfig::default()
        };
        assert_eq!(
            generate_corpus(&cfg).unwrap(),
            generate_corpus(&cfg).unwrap()
        );
        let other = SynthConfig {
            seed: 1,
            ..cfg.clone()
        };
        assert_ne!(
            generate_corpus(&cfg).unwrap(),
            generate_corpus(&other).unwrap()
        );
    }

    #[test]
    fn event_count_matches_poisson_mean() {
        let cfg = SynthConfig {
            num_pieces: 100,
            seed: 11,
            ..SynthConfig::default()
        };
        let corpus = generate_corpus(&cfg).unwrap();
        let mean = corpus.iter().map(|a| a.len() as f64).sum::<f64>() / 100.0;
        // Poisson(60) per piece: standard error of the mean is sqrt(60)/10.
        let sigma = 60f64.sqrt() / 10.0;
        assert!((mean - 60.0).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for cfg in [
            SynthConfig {
                duration_range: (0.0, 1.0),
                ..SynthConfig::default()
            },
            SynthConfig {
                feature_dim: 8,
                ..SynthConfig::default()
            },
            SynthConfig {
                noise_sigma: -1.0,
                ..SynthConfig::default()
            },
            SynthConfig {
                note_rate_per_sec: 0.0,
                ..SynthConfig::default()
            },
        ] {
            assert!(generate_corpus(&cfg).is_err());
        }
    }

    #[test]
    fn silence_renders_zero_rows() {
        let grid = FrameGrid::new(100.0, 50).unwrap();
        let f = render_features::<f64>(&Annotation::empty(12), grid, &quiet()).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_fundamental_template() {
        let cfg = SynthConfig {
            harmonics: 1,
            ..quiet()
        };
        let a = Annotation::from_events(vec![NoteEvent::new(0.1, 0.3, 5)], 12).unwrap();
        let grid = FrameGrid::new(100.0, 40).unwrap();
        let f = render_features::<f32>(&a, grid, &cfg).unwrap();
        for t in 0..40 {
            let center = (t as f64 + 0.5) * 0.01;
            let on = (0.1..0.3).contains(&center);
            for (j, &v) in f.row(t).iter().enumerate() {
                let want = if on && j == 20 { 1.0 } else { 0.0 };
                assert_eq!(v, want, "frame {t} bin {j}");
            }
        }
    }

    #[test]
    fn template_harmonics() {
        let cfg = SynthConfig::default();
        let p: Vec<f64> = template(1, &cfg);
        assert_eq!((p[4], p[8], p[12]), (1.0, 0.5, 1.0 / 3.0));
        assert_eq!(p.iter().filter(|&&v| v != 0.0).count(), 3);
        let p0: Vec<f64> = template(0, &cfg);
        assert_eq!(p0[0], 1.0);
        assert_eq!(p0.iter().filter(|&&v| v != 0.0).count(), 1);
        let top: Vec<f64> = template(11, &cfg);
        assert_eq!(top.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn frames_inside_one_note_are_identical() {
        let a = Annotation::from_events(vec![NoteEvent::new(0.0, 1.0, 3)], 12).unwrap();
        let grid = FrameGrid::new(31.25, 40).unwrap();
        let f = render_features::<f64>(&a, grid, &quiet()).unwrap();
        assert_eq!(f.row(10), f.row(11));
    }

    #[test]
    fn frame_energy_is_sum_of_template_energies() {
        // Labels 3 and 7 occupy bins {12,24,36} and {28}: no overlap.
        let cfg = quiet();
        let a = Annotation::from_events(
            vec![NoteEvent::new(0.0, 0.5, 3), NoteEvent::new(0.2, 0.4, 7)],
            12,
        )
        .unwrap();
        let grid = FrameGrid::new(100.0, 50).unwrap();
        let f = render_features::<f64>(&a, grid, &cfg).unwrap();
        let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let e3 = energy(&template(3, &cfg));
        let e7 = energy(&template(7, &cfg));
        assert!((energy(f.row(30)) - (e3 + e7)).abs() < 1e-12);
        assert!((energy(f.row(10)) - e3).abs() < 1e-12);
    }

    #[test]
    fn noise_is_seeded() {
        let cfg = SynthConfig::default();
        let a = Annotation::empty(12);
        let grid = FrameGrid::new(100.0, 10).unwrap();
        let x = render_features_seeded::<f64>(&a, grid, &cfg, 4).unwrap();
        let y = render_features_seeded::<f64>(&a, grid, &cfg, 4).unwrap();
        let z = render_features_seeded::<f64>(&a, grid, &cfg, 5).unwrap();
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert!(x.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn short_grid_is_rejected() {
        let a = Annotation::from_events(vec![NoteEvent::new(0.0, 1.0, 3)], 12).unwrap();
        let grid = FrameGrid::new(100.0, 50).unwrap();
        assert!(render_features::<f64>(&a, grid, &quiet()).is_err());
    }
}
