//! Neural-embedding variant: three small networks (model reward, human
//! reward, cost) whose hidden activations replace the raw context in the GLM
//! estimators. Networks are retrained on a schedule, after which stored
//! embeddings are recomputed and the estimators rebuilt.

mod adam;
mod mlp;
mod pipeline;

pub use adam::{Adam, AdamSettings};
pub use mlp::{Mlp, MlpGrads, HIDDEN_WIDTH};
pub use pipeline::{train_step, EmbeddingBank, NeuralConfig, NeuralLinearPolicy, Role, TrainSchedule};
