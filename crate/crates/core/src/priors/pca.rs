use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{check_len, MotionPrior, PriorError};
use crate::autodiff::{Scalar, Var};
use crate::kinematics::{default_skeleton, MotionSequence, Skeleton, DEFAULT_SKELETON_ID};

const FORMAT: &str = "moproc-pca";
const VERSION: u32 = 1;

/// Linear motion model `mean + B · (σ ⊙ z)` with orthonormal columns in `B`.
///
/// `σ` holds the per-component standard deviations of the training set, so
/// unit-variance latents reproduce its spread.
#[derive(Clone, Debug)]
pub struct PcaPrior {
    skeleton: Skeleton,
    frames: usize,
    fps: f64,
    mean: Vec<f64>,
    /// Component-major: `basis[i * dims + r]`.
    basis: Vec<f64>,
    sigma: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PcaFile {
    format: String,
    version: u32,
    skeleton: String,
    frames: usize,
    fps: f64,
    dims: usize,
    mean: Vec<f64>,
    sigma: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl PcaPrior {
    /// Fits the top `m` principal directions of the flattened motions.
    /// Components with vanishing variance are dropped with a warning.
    pub fn train(dataset: &[MotionSequence], m: usize) -> Result<Self, PriorError> {
        Self::train_with_skeleton(dataset, m, default_skeleton())
    }

    pub fn train_with_skeleton(dataset: &[MotionSequence], m: usize, skeleton: Skeleton) -> Result<Self, PriorError> {
        let first = dataset.first().ok_or_else(|| PriorError::Dataset("empty dataset".into()))?;
        if m == 0 {
            return Err(PriorError::Config("latent dimension must be at least 1".into()));
        }
        if dataset.len() < m {
            return Err(PriorError::Dataset(format!("{} motions cannot support {m} components", dataset.len())));
        }
        let (frames, fps) = (first.frame_count(), first.fps);
        if first.joint_count() != skeleton.joint_count() {
            return Err(PriorError::Dataset("joint count differs from the skeleton".into()));
        }
        if dataset.iter().any(|s| s.frame_count() != frames || s.joint_count() != first.joint_count() || s.fps != fps) {
            return Err(PriorError::Dataset("motions differ in frame count, joint count or fps".into()));
        }
        let rows: Vec<Vec<f64>> = dataset.iter().map(MotionSequence::flatten).collect();
        let (n, dims) = (rows.len(), rows[0].len());
        let mut mean = vec![0.0; dims];
        for r in &rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n as f64;
            }
        }
        let centered = DMatrix::from_fn(n, dims, |i, j| rows[i][j] - mean[j]);
        let gram = &centered * centered.transpose();
        let eig = SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let top = eig.eigenvalues[order[0]].max(0.0);
        let mut basis = Vec::with_capacity(m * dims);
        let mut sigma = Vec::with_capacity(m);
        for &i in order.iter().take(m) {
            let lambda = eig.eigenvalues[i];
            if !(lambda > 1e-12 * top.max(f64::MIN_POSITIVE)) {
                log::warn!("covariance has rank {}; reducing latent dimension from {m}", sigma.len());
                break;
            }
            let dir = centered.transpose() * eig.eigenvectors.column(i) / lambda.sqrt();
            basis.extend(dir.iter());
            sigma.push((lambda / (n.max(2) - 1) as f64).sqrt());
        }
        if sigma.is_empty() {
            return Err(PriorError::Dataset("all training motions are identical".into()));
        }
        let mut prior = Self { skeleton, frames, fps, mean, basis, sigma };
        prior.orthonormalize();
        Ok(prior)
    }

    /// Modified Gram–Schmidt pass to remove round-off drift.
    fn orthonormalize(&mut self) {
        let dims = self.mean.len();
        for i in 0..self.sigma.len() {
            for j in 0..i {
                let (head, tail) = self.basis.split_at_mut(i * dims);
                let bj = &head[j * dims..(j + 1) * dims];
                let bi = &mut tail[..dims];
                let dot: f64 = bi.iter().zip(bj).map(|(a, b)| a * b).sum();
                bi.iter_mut().zip(bj).for_each(|(a, b)| *a -= dot * b);
            }
            let bi = &mut self.basis[i * dims..(i + 1) * dims];
            let norm = bi.iter().map(|a| a * a).sum::<f64>().sqrt();
            bi.iter_mut().for_each(|a| *a /= norm);
        }
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let d = self.mean.len();
        &self.basis[i * d..(i + 1) * d]
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Latent whose decoding is the orthogonal projection of `motion`.
    pub fn encode(&self, motion: &MotionSequence) -> Result<Vec<f64>, PriorError> {
        let flat = motion.flatten();
        if flat.len() != self.mean.len() {
            return Err(PriorError::Dataset("motion shape differs from the model".into()));
        }
        Ok((0..self.sigma.len())
            .map(|i| {
                let dot: f64 = self.component(i).iter().zip(&flat).zip(&self.mean).map(|((b, x), m)| b * (x - m)).sum();
                dot / self.sigma[i]
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        let d = self.mean.len();
        let file = PcaFile {
            format: FORMAT.into(),
            version: VERSION,
            skeleton: self.skeleton.id.clone(),
            frames: self.frames,
            fps: self.fps,
            dims: d,
            mean: self.mean.clone(),
            sigma: self.sigma.clone(),
            basis: self.basis.chunks(d).map(<[f64]>::to_vec).collect(),
        };
        serde_json::to_string(&file).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PriorError> {
        let f: PcaFile = serde_json::from_str(text).map_err(|e| PriorError::Format(e.to_string()))?;
        if f.format != FORMAT || f.version != VERSION {
            return Err(PriorError::Format(format!("unsupported format {} v{}", f.format, f.version)));
        }
        if f.skeleton != DEFAULT_SKELETON_ID {
            return Err(PriorError::Format(format!("unknown skeleton '{}'", f.skeleton)));
        }
        let skeleton = default_skeleton();
        let bad = |what: &str| Err(PriorError::Format(format!("inconsistent {what}")));
        if f.dims != skeleton.pose_dim() * f.frames || f.mean.len() != f.dims {
            return bad("dimensions");
        }
        if f.basis.len() != f.sigma.len() || f.basis.is_empty() || f.basis.iter().any(|b| b.len() != f.dims) {
            return bad("basis");
        }
        if !(f.fps > 0.0) || f.sigma.iter().any(|s| !(*s > 0.0)) {
            return bad("scales");
        }
        Ok(Self {
            skeleton,
            frames: f.frames,
            fps: f.fps,
            mean: f.mean,
            basis: f.basis.concat(),
            sigma: f.sigma,
        })
    }

    fn decode_generic<S: Scalar>(&self, z: &[S], ctx: S) -> Vec<S> {
        let d = self.mean.len();
        let m = self.sigma.len();
        let mut terms = Vec::with_capacity(m);
        (0..d)
            .map(|r| {
                terms.clear();
                terms.extend((0..m).map(|i| (z[i], self.basis[i * d + r] * self.sigma[i])));
                S::linear_combination(ctx, &terms, self.mean[r])
            })
            .collect()
    }
}

impl MotionPrior for PcaPrior {
    fn id(&self) -> String {
        format!("pca:m={}", self.sigma.len())
    }

    fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    fn frames(&self) -> usize {
        self.frames
    }

    fn fps(&self) -> f64 {
        self.fps
    }

    fn latent_dim(&self) -> usize {
        self.sigma.len()
    }

    fn sample_latent(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.latent_dim()).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn decode_values(&self, z: &[f64]) -> Result<Vec<f64>, PriorError> {
        check_len(self.latent_dim(), z)?;
        Ok(self.decode_generic(z, 0.0))
    }

    fn decode_vars<'t>(&self, z: &[Var<'t>]) -> Result<Vec<Var<'t>>, PriorError> {
        check_len(self.latent_dim(), z)?;
        Ok(self.decode_generic(z, z[0]))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{synth_walk_dataset, GaitRanges};
    use super::*;

    fn data(n: usize) -> Vec<MotionSequence> {
        synth_walk_dataset(n, 7, &GaitRanges::default(), 16, 20.0).unwrap()
    }

    #[test]
    fn zero_latent_decodes_to_mean() {
        let ds = data(12);
        let p = PcaPrior::train(&ds, 5).unwrap();
        let flat = p.decode_values(&[0.0; 5]).unwrap();
        let n = ds.len() as f64;
        for (i, v) in flat.iter().enumerate() {
            let mean: f64 = ds.iter().map(|m| m.flatten()[i]).sum::<f64>() / n;
            assert!((v - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        let p = PcaPrior::train(&data(12), 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let dot: f64 = p.component(i).iter().zip(p.component(j)).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8, "{i},{j}: {dot}");
            }
        }
    }

    /// Rank-m reconstruction error equals the discarded spectrum of the
    /// covariance, computed independently by a d×d eigendecomposition.
    #[test]
    fn reconstruction_matches_brute_force_spectrum() {
        let ds = synth_walk_dataset(10, 2, &GaitRanges::default(), 3, 20.0).unwrap();
        let rows: Vec<Vec<f64>> = ds.iter().map(|m| m.flatten()).collect();
        let d = rows[0].len();
        let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / 10.0).collect();
        let mut scatter = DMatrix::<f64>::zeros(d, d);
        for r in &rows {
            for a in 0..d {
                for b in 0..d {
                    scatter[(a, b)] += (r[a] - mean[a]) * (r[b] - mean[b]);
                }
            }
        }
        let mut spectrum: Vec<f64> = SymmetricEigen::new(scatter).eigenvalues.iter().copied().collect();
        spectrum.sort_by(|a, b| b.total_cmp(a));
        for m in [1, 3, 6] {
            let p = PcaPrior::train(&ds, m).unwrap();
            let mut sse = 0.0;
            for motion in &ds {
                let z = p.encode(motion).unwrap();
                let rec = p.decode_values(&z).unwrap();
                sse += rec.iter().zip(motion.flatten()).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            }
            let oracle: f64 = spectrum[m..].iter().map(|l| l.max(0.0)).sum();
            assert!((sse - oracle).abs() < 1e-8 * (1.0 + oracle), "m={m}: {sse} vs {oracle}");
            let full: f64 = spectrum.iter().map(|l| l.max(0.0)).sum();
            assert!(sse <= full + 1e-9);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = PcaPrior::train(&data(8), 4).unwrap();
        let q = PcaPrior::from_json(&p.to_json()).unwrap();
        let z = p.sample_latent(3);
        assert_eq!(p.decode_values(&z).unwrap(), q.decode_values(&z).unwrap());
        assert!(PcaPrior::from_json("{}").is_err());
        let broken = p.to_json().replace("\"version\":1", "\"version\":9");
        assert!(PcaPrior::from_json(&broken).is_err());
    }

    #[test]
    fn degenerate_dataset_reduces_rank() {
        let one = data(1).remove(0);
        let ds = vec![one.clone(), one.clone(), one.clone(), data(2).remove(1)];
        let p = PcaPrior::train(&ds, 3).unwrap();
        assert_eq!(p.latent_dim(), 1);
        assert!(PcaPrior::train(&ds[..2], 3).is_err());
        assert!(PcaPrior::train(&[one.clone(), one], 1).is_err());
    }

    #[test]
    fn sampled_mean_tracks_training_mean() {
        let p = PcaPrior::train(&data(12), 6).unwrap();
        let count = 400;
        let mut acc = vec![0.0; p.mean().len()];
        for s in 0..count {
            for (a, v) in acc.iter_mut().zip(p.decode_values(&p.sample_latent(s)).unwrap()) {
                *a += v / count as f64;
            }
        }
        let worst = acc.iter().zip(p.mean()).map(|(a, m)| (a - m).abs()).fold(0.0, f64::max);
        let spread = p.sigma()[0];
        assert!(worst < 0.25 * spread, "{worst} vs σ₀ {spread}");
    }
}
