#pragma once

#include <string>
#include <vector>

#include "ccirc/ledger.hpp"

namespace ccirc {

struct read_result {
   ledger l;
   certificate cert;
};

/// Common surface of underlay chains and composed protocols: write one
/// transaction stream, read one finalized ledger per observer. Gates are
/// built against this interface only; a chain's internals stay hidden.
class chain_handle {
 public:
   virtual ~chain_handle() = default;

   virtual const std::string& id() const = 0;
   virtual bool generates_certificates() const = 0;

   /// Epoch duration: the protocol confirms at most one batch per pace().
   virtual tick_t pace() const = 0;

   /// Structural liveness latency bound, measured from max(gst, submit).
   virtual tick_t latency_bound() const = 0;

   /// Stateful readers (lagged views) need observers announced up front.
   virtual void register_observer(const std::string&) {}

   virtual void submit(const transaction& tx, tick_t now) = 0;

   /// The observer's current finalized view.
   virtual read_result read(const std::string& observer, tick_t now) = 0;

   /// Every conflicting view this observer can currently justify. Forked
   /// leaves expose one entry per adversary-exposed branch; composed
   /// protocols expose their single output.
   virtual std::vector<read_result> read_all(const std::string& observer, tick_t now) {
      return {read(observer, now)};
   }

   /// Embedding-facing view; may be uncertified (and adversarially forked)
   /// for chains that do not generate certificates.
   virtual read_result read_snapshot(const std::string& observer, tick_t now) {
      return read(observer, now);
   }
};

}  // namespace ccirc
