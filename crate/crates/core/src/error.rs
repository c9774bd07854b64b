use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("accumulator overflow: |{value}| exceeds the 48-bit register")]
    AccumulatorOverflow { value: i128 },

    #[error("accumulator budget exceeded: worst-case |sum| {bound} >= 2^47")]
    AccumulatorBudget { bound: u128 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("exponent error: output exponent {out_exponent} is below input exponent sum {in_exponent_sum}")]
    Exponent {
        out_exponent: i32,
        in_exponent_sum: i32,
    },

    #[error("value {value} out of range for a {bits}-bit word")]
    WordRange { value: i64, bits: u8 },

    #[error("bit width {0} outside [1, 16]")]
    BitWidth(u32),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("corrupt stream: {0}")]
    CorruptStream(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("tensor file: {0}")]
    TensorFile(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("shape chain error between layer {from} ({from_name}) and layer {to} ({to_name}): {detail}")]
    ShapeChain {
        from: usize,
        from_name: String,
        to: usize,
        to_name: String,
        detail: String,
    },

    #[error("layer {index} ({name}): {source}")]
    Layer {
        index: usize,
        name: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_layer(self, index: usize, name: &str) -> Self {
        Error::Layer {
            index,
            name: name.to_string(),
            source: Box::new(self),
        }
    }
}
