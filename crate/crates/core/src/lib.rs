//! Spectral Bridges clustering.
//!
//! A dataset is vector-quantized into `m` Voronoi regions with k-means++,
//! adjacent regions are linked by a "bridge" affinity measuring how much of
//! their joint mass lies between the two centroids, and a normalized spectral
//! clustering of that `m`-node graph labels the regions. Points inherit the
//! label of their region.
//!
//! ```
//! use spectral_bridges::{data, fit, RngState, SBConfig};
//!
//! let ds = data::moons(400, 0.05, &mut RngState::new(7).stream(0)).unwrap();
//! let model = fit(&ds.x, &SBConfig::new(2, 20)).unwrap();
//! assert_eq!(model.point_labels().unwrap().len(), 400);
//! ```

pub mod bridge;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod numerics;
pub mod quantize;
pub mod spectral;

pub use bridge::{bridge_affinity, AffinityMatrix, AffinityTransform};
pub use data::LabeledDataset;
pub use error::{Error, ErrorClass, Result};
pub use eval::{ari, nmi};
pub use model::{fit, suggest_m, ClusterModel, SBConfig};
pub use numerics::{DataMatrix, RngState, SymMatrix};
pub use quantize::{kmeans, KMeansConfig, QuantizationResult};
