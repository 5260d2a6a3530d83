#ifndef SEQMARK_SEQMARK_HPP
#define SEQMARK_SEQMARK_HPP

#include "seqmark/adversary.hpp"
#include "seqmark/allocation.hpp"
#include "seqmark/correlation.hpp"
#include "seqmark/detector.hpp"
#include "seqmark/embedder.hpp"
#include "seqmark/error.hpp"
#include "seqmark/harness.hpp"
#include "seqmark/ledger.hpp"
#include "seqmark/sequence.hpp"

#endif  // SEQMARK_SEQMARK_HPP
