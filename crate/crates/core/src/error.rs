// Copyright 2026 The fkgfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("all weights are zero")]
    AllZero,
    #[error("configurations are defined on overlapping site sets")]
    OverlappingDomains,
    #[error("site spaces do not match: {0}")]
    SpaceMismatch(String),
    #[error("{what}: {got} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        got: usize,
        cap: usize,
    },
    #[error("folding is undefined: every folded weight is zero")]
    FoldingUndefined,
    #[error("malformed folding specification: {0}")]
    MalformedFoldSpec(String),
    #[error("no configuration is compatible with a positive-weight bond assignment")]
    NoCompatiblePair,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("site `{0}` does not have a binary alphabet")]
    NonBinaryAlphabet(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
