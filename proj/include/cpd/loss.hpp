#pragma once

#include <span>
#include <vector>

#include "cpd/cp_model.hpp"

namespace cpd {

/// min(||a - b||, ||a + b||).
double sign_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// max_k max_r min(||a^_{k,r} - a_{k,r}||, ||a^_{k,r} + a_{k,r}||) for already
/// aligned columns. For R = 1 this is the rank-one error.
double loss_general(std::span<const Matrix> est, std::span<const Matrix> truth);
double loss_general(const CpModel& est, const CpModel& truth);

/// For every estimated column, the smallest sign distance to any true column.
Vector loss_unmatched(const Matrix& est, const Matrix& truth);

/// loss_general minimised over the assignment of estimated components to
/// true components (the same assignment on every mode). With fewer estimated
/// than true components the unused true components are ignored. Exhaustive
/// for R <= 8, greedy beyond that.
double loss_matched(std::span<const Matrix> est, std::span<const Matrix> truth);
double loss_matched(const CpModel& est, const CpModel& truth);

}  // namespace cpd
