use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the identification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("undecodable image {path}: {reason}")]
    UndecodableImage { path: PathBuf, reason: String },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("crop rectangle {rect:?} out of bounds for {width}x{height} image")]
    CropOutOfBounds {
        rect: crate::imaging::CropRect,
        width: u32,
        height: u32,
    },
    #[error("image too small: {width}x{height} needs more than {min}x{min} pixels")]
    ImageTooSmall { width: u32, height: u32, min: u32 },
    #[error("unsupported LBP radius {0} (expected 1 or 2)")]
    UnsupportedRadius(u32),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("missing teat: {0}")]
    MissingTeat(String),
    #[error("duplicate teat position: {0}")]
    DuplicatePosition(String),
    #[error("non-positive box: {0}")]
    NonPositiveBox(String),
    #[error("box outside canvas: {0}")]
    BoxOutsideCanvas(String),

    #[error("empty gallery")]
    EmptyGallery,
    #[error("inconsistent feature layout: expected {expected}, found {found}")]
    InconsistentLayout { expected: String, found: String },
    #[error("non-finite feature value at dimension {0}")]
    NonFiniteFeature(usize),
    #[error("feature vector length {len} does not match layout {layout}")]
    LengthMismatch { layout: String, len: usize },
    #[error("layout mismatch: model expects {expected}, probe is {found}")]
    LayoutMismatch { expected: String, found: String },
    #[error("unknown algorithm: {0}")]
    UnknownAlgorithm(String),
    #[error("unknown feature layout: {0}")]
    UnknownLayout(String),
    #[error("unsupported model document version {0}")]
    ModelVersion(u32),

    #[error("cow {cow} is missing {session}")]
    CowMissingSession { cow: String, session: String },
    #[error("duplicate sample: {0}")]
    DuplicateSample(String),
    #[error("empty cow subset")]
    EmptySubset,
    #[error("cow {0} is not present in both gallery and probes")]
    CowNotInSplit(String),
    #[error("group size {n} exceeds the {available} eligible cows")]
    GroupSizeTooLarge { n: usize, available: usize },

    #[error("parse error in {context}: {reason}")]
    Parse { context: String, reason: String },
    #[error("schema violation in {context}: {reason}")]
    SchemaViolation { context: String, reason: String },
    #[error("duplicate manifest entry: {0}")]
    DuplicateEntry(String),
    #[error("sample {sample}: {source}")]
    Extraction {
        sample: String,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable name of the error kind, e.g. `missing-teat`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::FileNotFound(_) => "file-not-found",
            Error::UndecodableImage { .. } => "undecodable-image",
            Error::InvalidImage(_) => "invalid-image",
            Error::CropOutOfBounds { .. } => "crop-out-of-bounds",
            Error::ImageTooSmall { .. } => "image-too-small",
            Error::UnsupportedRadius(_) => "unsupported-radius",
            Error::DegenerateGeometry(_) => "degenerate-geometry",
            Error::MissingTeat(_) => "missing-teat",
            Error::DuplicatePosition(_) => "duplicate-position",
            Error::NonPositiveBox(_) => "non-positive-box",
            Error::BoxOutsideCanvas(_) => "box-outside-canvas",
            Error::EmptyGallery => "empty-gallery",
            Error::InconsistentLayout { .. } => "inconsistent-layout",
            Error::NonFiniteFeature(_) => "non-finite-feature",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::LayoutMismatch { .. } => "layout-mismatch",
            Error::UnknownAlgorithm(_) => "unknown-algorithm",
            Error::UnknownLayout(_) => "unknown-layout",
            Error::ModelVersion(_) => "model-version",
            Error::CowMissingSession { .. } => "cow-missing-session",
            Error::DuplicateSample(_) => "duplicate-sample",
            Error::EmptySubset => "empty-subset",
            Error::CowNotInSplit(_) => "cow-not-in-split",
            Error::GroupSizeTooLarge { .. } => "group-size-too-large",
            Error::Parse { .. } => "parse-error",
            Error::SchemaViolation { .. } => "schema-violation",
            Error::DuplicateEntry(_) => "duplicate-entry",
            Error::Extraction { .. } => "extraction-error",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Io { .. } => "io-error",
            Error::Csv(_) => "io-error",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
