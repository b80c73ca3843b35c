use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("video `{0}` has no frames")]
    EmptyVideo(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("duplicate video id `{0}`")]
    DuplicateVideo(String),

    #[error("unknown video `{0}`")]
    UnknownVideo(String),

    #[error("class id {class_id} out of range (num_classes = {num_classes})")]
    ClassOutOfRange { class_id: usize, num_classes: usize },

    #[error("segment out of bounds: video `{video_id}` start {start} length {length} exceeds {frames} frames")]
    SegmentOutOfBounds {
        video_id: String,
        start: usize,
        length: usize,
        frames: usize,
    },

    #[error("duplicate label {0}")]
    DuplicateLabel(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate labels: every label is {0}")]
    DegenerateLabels(bool),

    #[error("non-finite loss at epoch {0}; learning rate too large?")]
    NonFiniteLoss(usize),

    #[error("misaligned keys at position {0}")]
    MisalignedKeys(usize),

    #[error("missing video score for `{video_id}` class {class_id}")]
    MissingScore { video_id: String, class_id: usize },

    #[error("duplicate segment {0} in ranked list")]
    DuplicateSegment(String),
}
