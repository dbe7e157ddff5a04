// Copyright 2026 The segshap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace segshap {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SEGSHAP_DEFINE_ERROR(Name)     \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// Dataset ingestion
SEGSHAP_DEFINE_ERROR(MalformedHeader);
SEGSHAP_DEFINE_ERROR(UnsupportedFeature);
SEGSHAP_DEFINE_ERROR(DataRowMismatch);
SEGSHAP_DEFINE_ERROR(EmptyData);
SEGSHAP_DEFINE_ERROR(NonDivisibleColumns);
SEGSHAP_DEFINE_ERROR(NonNumericValue);
SEGSHAP_DEFINE_ERROR(InvalidGeometry);

// Segmentation
SEGSHAP_DEFINE_ERROR(InvalidCount);
SEGSHAP_DEFINE_ERROR(SeriesTooShort);

// Models
SEGSHAP_DEFINE_ERROR(MissingClass);
SEGSHAP_DEFINE_ERROR(ShapeMismatch);
SEGSHAP_DEFINE_ERROR(HandshakeFailure);
SEGSHAP_DEFINE_ERROR(ProtocolViolation);
SEGSHAP_DEFINE_ERROR(ProcessExit);
SEGSHAP_DEFINE_ERROR(ExternalProtocolError);

// Attribution
SEGSHAP_DEFINE_ERROR(InvalidFeature);
SEGSHAP_DEFINE_ERROR(TooManyFeatures);
SEGSHAP_DEFINE_ERROR(InvalidPermutationCount);

// Evaluation
SEGSHAP_DEFINE_ERROR(ZeroBaseProbability);
SEGSHAP_DEFINE_ERROR(SingleClassDataset);

// Runner
SEGSHAP_DEFINE_ERROR(ConfigInvalid);
SEGSHAP_DEFINE_ERROR(DatasetLoadError);
SEGSHAP_DEFINE_ERROR(EmptyAfterFiltering);
SEGSHAP_DEFINE_ERROR(UnpairedRecords);

#undef SEGSHAP_DEFINE_ERROR

}  // namespace segshap
