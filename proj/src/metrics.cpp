#include "metrics.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace peerfl {

std::string to_string(RecordEvent e) {
  switch (e) {
    case RecordEvent::Train: return "train";
    case RecordEvent::Receive: return "receive";
    case RecordEvent::Send: return "send";
    case RecordEvent::Eval: return "eval";
    case RecordEvent::Drop: return "drop";
    case RecordEvent::Warn: return "warn";
    case RecordEvent::Observe: return "observe";
  }
  return "unknown";
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <typename T>
std::string opt_csv(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) return num(*v);
  else return std::to_string(*v);
}

template <typename T>
std::string opt_json(const std::optional<T>& v) {
  if (!v) return "null";
  if constexpr (std::is_floating_point_v<T>) return num(*v);
  else return std::to_string(*v);
}

}  // namespace

void write_metrics(const MetricsLog& log, std::ostream& out, MetricsFormat format) {
  if (format == MetricsFormat::Csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : log) {
      out << r.round << ',' << r.device << ',' << to_string(r.event) << ',' << num(r.sim_time) << ','
          << opt_csv(r.loss) << ',' << opt_csv(r.accuracy) << ',' << opt_csv(r.adv_accuracy) << ',' << r.bytes
          << ',' << opt_csv(r.peer) << ',' << num(r.duration) << '\n';
    }
    return;
  }
  for (const auto& r : log) {
    out << "{\"round\":" << r.round << ",\"device\":" << r.device << ",\"event\":\"" << to_string(r.event)
        << "\",\"sim_time\":" << num(r.sim_time) << ",\"loss\":" << opt_json(r.loss)
        << ",\"accuracy\":" << opt_json(r.accuracy) << ",\"adv_accuracy\":" << opt_json(r.adv_accuracy)
        << ",\"bytes\":" << r.bytes << ",\"peer\":" << opt_json(r.peer) << ",\"duration\":" << num(r.duration)
        << "}\n";
  }
}

void write_metrics(const MetricsLog& log, const std::string& path, MetricsFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_metrics(log, out, format);
  out.flush();
  if (!out) throw std::runtime_error("failed writing metrics to '" + path + "'");
}

std::string format_metrics(const MetricsLog& log, MetricsFormat format) {
  std::ostringstream out;
  write_metrics(log, out, format);
  return out.str();
}

Summary summarize(const MetricsLog& log) {
  Summary s;
  std::map<NodeId, const MetricsRecord*> last_eval;
  std::map<NodeId, bool> seen;
  std::map<int, RoundSplit> rounds;
  for (const auto& r : log) {
    seen[r.device] = true;
    s.total_sim_time = std::max(s.total_sim_time, r.sim_time);
    s.rounds = std::max(s.rounds, r.round);
    switch (r.event) {
      case RecordEvent::Eval:
        last_eval[r.device] = &r;
        break;
      case RecordEvent::Send:
        s.total_bytes += r.bytes;
        ++s.messages;
        break;
      case RecordEvent::Receive:
        s.comm_time += r.duration;
        rounds[r.round].comm_time += r.duration;
        break;
      case RecordEvent::Train:
        s.compute_time += r.duration;
        rounds[r.round].compute_time += r.duration;
        break;
      case RecordEvent::Drop:
        ++s.drops;
        break;
      case RecordEvent::Warn:
        ++s.warnings;
        break;
      case RecordEvent::Observe:
        break;
    }
  }
  s.devices = seen.size();
  if (!last_eval.empty()) {
    double acc = 0.0, adv = 0.0;
    std::size_t adv_n = 0;
    for (const auto& [dev, rec] : last_eval) {
      acc += rec->accuracy.value_or(0.0);
      if (rec->adv_accuracy) {
        adv += *rec->adv_accuracy;
        ++adv_n;
      }
    }
    s.final_mean_accuracy = acc / static_cast<double>(last_eval.size());
    if (adv_n > 0) s.final_mean_adv_accuracy = adv / static_cast<double>(adv_n);
  }
  for (auto& [round, split] : rounds) {
    split.round = round;
    s.per_round.push_back(split);
  }
  return s;
}

std::string summary_json(const Summary& s) {
  std::ostringstream out;
  out << "{\"devices\":" << s.devices << ",\"rounds\":" << s.rounds
      << ",\"final_mean_accuracy\":" << num(s.final_mean_accuracy)
      << ",\"final_mean_adv_accuracy\":" << opt_json(s.final_mean_adv_accuracy)
      << ",\"total_sim_time\":" << num(s.total_sim_time) << ",\"total_bytes\":" << s.total_bytes
      << ",\"messages\":" << s.messages << ",\"drops\":" << s.drops << ",\"warnings\":" << s.warnings
      << ",\"comm_time\":" << num(s.comm_time) << ",\"compute_time\":" << num(s.compute_time)
      << ",\"busy_time\":" << num(s.busy_time()) << ",\"per_round\":[";
  for (std::size_t i = 0; i < s.per_round.size(); ++i) {
    const auto& r = s.per_round[i];
    out << (i ? "," : "") << "{\"round\":" << r.round << ",\"comm_time\":" << num(r.comm_time)
        << ",\"compute_time\":" << num(r.compute_time) << "}";
  }
  out << "]}";
  return out.str();
}

}  // namespace peerfl
