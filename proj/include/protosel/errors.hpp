// Copyright 2026 The protosel Authors
// SPDX-License-Identifier: Apache-2.0
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

namespace protosel {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define PROTOSEL_ERROR(Name)                 \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    }

PROTOSEL_ERROR(CompositeProtocol);
PROTOSEL_ERROR(UnknownRole);
PROTOSEL_ERROR(InvalidProtocol);
PROTOSEL_ERROR(CyclicFatherRelation);
PROTOSEL_ERROR(ProtocolViolation);
PROTOSEL_ERROR(PointOutOfRange);
PROTOSEL_ERROR(UnknownReceiver);
PROTOSEL_ERROR(BudgetExceeded);
PROTOSEL_ERROR(TransportDown);
PROTOSEL_ERROR(ParseError);
PROTOSEL_ERROR(UnresolvedReference);
PROTOSEL_ERROR(NoDeactivatedRole);

#undef PROTOSEL_ERROR

}  // namespace protosel
