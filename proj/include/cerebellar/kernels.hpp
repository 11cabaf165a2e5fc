// Copyright 2026 The cerebellar-residual Authors
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

#ifndef CEREBELLAR_KERNELS_HPP_
#define CEREBELLAR_KERNELS_HPP_

// Dense inner loops of the residual controller. Two implementations share
// these signatures:
//
//   kernels::serial    plain loops, the reference the tests compare against.
//   kernels::parallel  OpenMP worksharing over independent output elements.
//
// Parallel versions split only over outputs; every output element is reduced
// in the same order as the serial loop, so both produce bit-identical results
// for any thread count. Reductions that would need a cross-thread combine
// (norms, dot products) exist only in serial form.
//
// The unqualified kernels:: entry points dispatch to the parallel versions
// when the library is built with OpenMP, otherwise to the serial ones.

#include "cerebellar/types.hpp"

namespace cerebellar::kernels {

namespace serial {

// out[m] = max(0, sum_d V[m,d] * x[d])
void ReluMatVec(const Matrix& V, const Vector& x, Vector& out);

// E += aE (h - E); I += aI (h - I); phi = E - I
void DualTrace(Vector& excit, Vector& inhib, const Vector& h, double alpha_e,
               double alpha_i, Vector& phi);

// out[j] += weight * (W[j,:] . phi)
void AccumulateReadout(const Matrix& W, const Vector& phi, double weight,
                       Vector& out);

// delta[j,m] = coef[j] * phi[m]
void Outer(const Vector& coef, const Vector& phi, Matrix& delta);

// m = beta m + (1 - beta) delta
void Momentum(Matrix& m, const Matrix& delta, double beta);

// W = keep * W + step * m - gamma * W, evaluated from the pre-update W.
void HeadUpdate(Matrix& W, const Matrix& m, double keep, double step,
                double gamma);

// W *= s
void Scale(Matrix& W, double s);

double FrobeniusNorm(const Matrix& W);
double Norm2(const Vector& v);
double Dot(const Vector& a, const Vector& b);

}  // namespace serial

namespace parallel {

void ReluMatVec(const Matrix& V, const Vector& x, Vector& out);
void DualTrace(Vector& excit, Vector& inhib, const Vector& h, double alpha_e,
               double alpha_i, Vector& phi);
void AccumulateReadout(const Matrix& W, const Vector& phi, double weight,
                       Vector& out);
void Outer(const Vector& coef, const Vector& phi, Matrix& delta);
void Momentum(Matrix& m, const Matrix& delta, double beta);
void HeadUpdate(Matrix& W, const Matrix& m, double keep, double step,
                double gamma);
void Scale(Matrix& W, double s);

// Number of threads the parallel kernels would use (1 without OpenMP).
int MaxThreads();

}  // namespace parallel

// True when the library was compiled with OpenMP support.
bool HaveOpenMP();

#ifdef CEREBELLAR_USE_OPENMP
using parallel::AccumulateReadout;
using parallel::DualTrace;
using parallel::HeadUpdate;
using parallel::Momentum;
using parallel::Outer;
using parallel::ReluMatVec;
using parallel::Scale;
#else
using serial::AccumulateReadout;
using serial::DualTrace;
using serial::HeadUpdate;
using serial::Momentum;
using serial::Outer;
using serial::ReluMatVec;
using serial::Scale;
#endif
using serial::Dot;
using serial::FrobeniusNorm;
using serial::Norm2;

}  // namespace cerebellar::kernels

#endif  // CEREBELLAR_KERNELS_HPP_
