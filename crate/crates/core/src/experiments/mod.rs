//! End-to-end verification experiments, each producing a [`Report`].

pub mod domain;
pub mod dsc;
pub mod ellipticity;
pub mod hardy;
pub mod index;
pub mod kernel;
pub mod powers;
pub mod spectrum;
pub mod stats;
pub mod wavefront;
pub mod verdict;

use thiserror::Error;

pub use verdict::{Report, Verdict};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Assembly(#[from] crate::radial::AssemblyError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error(transparent)]
    Seeley(#[from] crate::seeley::SeeleyError),
    #[error(transparent)]
    Space(#[from] crate::spaces::SpaceError),
    #[error(transparent)]
    Bessel(#[from] crate::bessel::BesselError),
    #[error(transparent)]
    Indicial(#[from] crate::indicial::IndicialError),
    #[error("ill-posed experiment: {0}")]
    IllPosed(String),
}
