#include "ccirc/serial_gate.hpp"

#include <algorithm>

namespace ccirc {

serial_gate::serial_gate(simulation& sim, std::string gate_id, std::shared_ptr<chain_handle> head,
                         std::shared_ptr<chain_handle> carrier)
    : serial_gate(sim, std::move(gate_id), std::move(head), std::move(carrier), options{}) {}

serial_gate::serial_gate(simulation& sim, std::string gate_id, std::shared_ptr<chain_handle> head,
                         std::shared_ptr<chain_handle> carrier, options opts)
    : sim_(sim), id_(std::move(gate_id)), head_(std::move(head)), carrier_(std::move(carrier)),
      opts_(opts) {
   if (!opts_.allow_uncertified &&
       (!head_->generates_certificates() || !carrier_->generates_certificates()))
      throw config_error("serial composition requires certificate-generating constituents: " +
                         id_);
   leaf_carrier_ = dynamic_cast<underlay_chain*>(carrier_.get());
   pace_ = std::max(head_->pace(), carrier_->pace());
   bound_ = head_->latency_bound() + carrier_->pace() + carrier_->latency_bound();
}

void serial_gate::register_observer(const std::string& obs) {
   head_->register_observer(obs);
   carrier_->register_observer(obs);
}

void serial_gate::submit(const transaction& tx, tick_t now) { head_->submit(tx, now); }

void serial_gate::step(simulation& sim, tick_t now) {
   if (leaf_carrier_)
      embed_into_leaf(now);
   else if (now % carrier_->pace() == 0)
      embed_into_composite(now);
}

void serial_gate::embed_into_leaf(tick_t now) {
   // One embedding pipeline per carrier branch: a split-brain carrier may
   // show each of its fictitious validator sets a different head view.
   for (int b = 0; b < leaf_carrier_->branch_count(); ++b) {
      std::string embed_key = id_ + "/embed@" + std::to_string(b);
      auto snap = head_->read_snapshot(embed_key, now);
      auto payload = std::make_shared<snapshot_payload>();
      payload->gate = id_;
      payload->snapshot = std::move(snap.l);
      payload->cert = snap.cert;
      transaction rec{id_ + "#s" + std::to_string(embed_seq_++), payload};
      leaf_carrier_->submit_record(rec, b, id_ + "@" + std::to_string(b));
   }
}

void serial_gate::embed_into_composite(tick_t now) {
   auto snap = head_->read_snapshot(id_ + "/embed", now);
   auto payload = std::make_shared<snapshot_payload>();
   payload->gate = id_;
   payload->snapshot = std::move(snap.l);
   payload->cert = snap.cert;
   carrier_->submit(transaction{id_ + "#s" + std::to_string(embed_seq_++), payload}, now);
}

read_result serial_gate::read(const std::string& observer, tick_t now) {
   auto carrier_view = carrier_->read(observer, now);
   ledger out;
   for (const auto& tx : carrier_view.l.txs) {
      auto snap = std::dynamic_pointer_cast<const snapshot_payload>(tx.payload);
      if (!snap || snap->gate != id_) continue;
      if (!opts_.allow_uncertified &&
          !sim_.certs().verify(snap->cert, digest_of(snap->snapshot)))
         continue;  // uncertified snapshot content is never consumed
      out = clean(out, snap->snapshot);
   }
   auto& prev = client_out_[observer];
   prev = merge_monotone(prev, out);
   return read_result{prev, sim_.certs().issue(id_, digest_of(prev))};
}

}  // namespace ccirc
