//! Training drivers for small quantum machine learning experiments, each paired
//! with an exact classical oracle: a Bloch-sphere binary classifier, MaxCut
//! QAOA, a hybrid quantum convolutional classifier, a barren-plateau scan and
//! thermal-state learning with quantum Hamiltonian-based models.

pub mod barren;
pub mod bloch;
pub mod qaoa;
pub mod qcnn;
pub mod thermal;
