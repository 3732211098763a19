// slmc: command-line front end for the subjective-logic Markov chain
// identifier.
//
//   slmc simulate  --paper-scenario | --spec FILE   [--seed N] [--out FILE]
//   slmc identify  TRACE.csv [--spec FILE | --paper-scenario] [identifier flags] [--out FILE]
//   slmc delays    DELAYS.csv | --synthetic [--seed N] [identifier flags] [--states-out FILE] [--out FILE]
//   slmc compare   REPORT.csv [--spec FILE | --paper-scenario] [--jump PACKET ...] [--out FILE]
//
// Exit codes: 0 success, 64 usage, 65 bad input data, 74 I/O failure,
// 78 invalid configuration.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slmc/channel_sim.hpp"
#include "slmc/config.hpp"
#include "slmc/delay_pipeline.hpp"
#include "slmc/errors.hpp"
#include "slmc/identifier.hpp"
#include "slmc/report.hpp"

namespace {

enum ExitCode : int
{
  exit_ok = 0,
  exit_usage = 64,
  exit_data = 65,
  exit_io = 74,
  exit_config = 78,
};

struct IdentifierFlags
{
  std::string config_path;
  std::optional<std::size_t> window;
  std::optional<double> theta;
  std::optional<double> prior_weight;
  std::optional<double> discount_prev;
  std::optional<double> discount_new;

  void add_to(CLI::App& cmd)
  {
    cmd.add_option("--config", config_path, "JSON run configuration");
    cmd.add_option("--window", window, "Window length l_w (default 100)");
    cmd.add_option("--theta", theta, "Degree-of-conflict reset threshold (default 0.15)");
    cmd.add_option("--prior-weight", prior_weight, "Non-informative prior weight W (default 2)");
    cmd.add_option("--discount-prev", discount_prev, "Discount on the running opinion, all rows (default 0.999)");
    cmd.add_option("--discount-new", discount_new, "Discount on the window opinion, all rows (default 0.999)");
  }

  slmc::ConfigFile load() const
  {
    return config_path.empty() ? slmc::ConfigFile{} : slmc::load_config(config_path);
  }

  slmc::IdentifierConfig resolve(const slmc::ConfigFile& file, std::size_t num_states) const
  {
    slmc::IdentifierConfig cfg;
    cfg.num_states = num_states;
    file.identifier.apply_to(cfg);
    slmc::IdentifierOverrides flags;
    flags.window = window;
    flags.theta = theta;
    flags.prior_weight = prior_weight;
    if (discount_prev)
    {
      flags.discount_prev = std::vector<double>{*discount_prev};
    }
    if (discount_new)
    {
      flags.discount_new = std::vector<double>{*discount_new};
    }
    flags.apply_to(cfg);
    cfg.validate();
    return cfg;
  }
};

struct ScenarioFlags
{
  std::string spec_path;
  bool builtin = false;

  void add_to(CLI::App& cmd, const char* purpose)
  {
    auto* spec = cmd.add_option("--spec", spec_path, std::string{"JSON scenario "} + purpose);
    auto* builtin_flag = cmd.add_flag("--paper-scenario", builtin, std::string{"Built-in burst-error scenario "} + purpose);
    spec->excludes(builtin_flag);
  }

  std::optional<slmc::ScenarioSpec> load() const
  {
    if (builtin)
    {
      return slmc::builtin_scenario();
    }
    if (!spec_path.empty())
    {
      return slmc::load_scenario(spec_path);
    }
    return std::nullopt;
  }
};

std::ofstream open_output(const std::string& path)
{
  std::ofstream out{path, std::ios::binary};
  if (!out)
  {
    throw slmc::IoError{"cannot write " + path};
  }
  return out;
}

std::ifstream open_input(const std::string& path)
{
  std::ifstream in{path, std::ios::binary};
  if (!in)
  {
    throw slmc::IoError{"cannot open " + path};
  }
  return in;
}

// Writes to `path`, or to stdout when it is empty.
template <typename Writer>
void emit(const std::string& path, Writer&& write)
{
  if (path.empty())
  {
    write(std::cout);
    std::cout.flush();
    return;
  }
  auto out = open_output(path);
  write(out);
  if (!out)
  {
    throw slmc::IoError{"failed writing " + path};
  }
}

std::size_t count_resets(const slmc::RunReport& report)
{
  std::size_t n = 0;
  for (const auto& row : report.rows)
  {
    n += static_cast<std::size_t>(std::count(row.reset.begin(), row.reset.end(), true));
  }
  return n;
}

slmc::RunReport identify_states(const std::vector<slmc::StateId>& states, const slmc::IdentifierConfig& cfg)
{
  const auto outputs = slmc::run(states, cfg);
  const std::size_t dropped = states.size() - outputs.size() * cfg.window_len;
  if (dropped > 0)
  {
    std::cerr << "warning: dropped " << dropped << " trailing observations (partial window)\n";
  }
  return slmc::make_report(outputs, cfg.window_len);
}

void print_run_summary(std::ostream& out, const slmc::RunReport& report, std::span<const std::size_t> jumps)
{
  out << "windows=" << report.rows.size() << " resets=" << count_resets(report) << '\n';
  if (report.has_truth())
  {
    slmc::write_summary(out, slmc::summarize(report, jumps));
  }
}

/*------------------------------------------------------------------------------------------------*/

struct SimulateCmd
{
  ScenarioFlags scenario;
  std::optional<std::uint64_t> seed;
  std::string out_path;

  void add_to(CLI::App& app)
  {
    auto* cmd = app.add_subcommand("simulate", "Generate a state trace from a Markov chain scenario");
    scenario.add_to(*cmd, "to simulate");
    cmd->add_option("--seed", seed, "RNG seed (overrides the scenario's)");
    cmd->add_option("--out", out_path, "Output CSV (default: stdout)");
    cmd->callback([this] { code = execute(); });
  }

  int execute() const
  {
    auto spec = scenario.load();
    if (!spec)
    {
      throw CLI::RequiredError{"--spec or --paper-scenario"};
    }
    if (seed)
    {
      spec->seed = *seed;
    }
    const auto trace = slmc::generate(*spec);
    emit(out_path, [&](std::ostream& os) { slmc::write_trace_csv(os, trace.states); });
    return exit_ok;
  }

  int code = exit_ok;
};

struct IdentifyCmd
{
  std::string input;
  ScenarioFlags scenario;
  IdentifierFlags ident;
  std::optional<std::size_t> states;
  std::string out_path;

  void add_to(CLI::App& app)
  {
    auto* cmd = app.add_subcommand("identify", "Run the SL identifier and the classical baseline on a state trace");
    cmd->add_option("trace", input, "Trace CSV (packet_index,state)")->required();
    scenario.add_to(*cmd, "supplying ground truth");
    ident.add_to(*cmd);
    cmd->add_option("--states", states, "Number of states (default: scenario, else largest id seen)");
    cmd->add_option("--out", out_path, "Report CSV (default: stdout)");
    cmd->callback([this] { code = execute(); });
  }

  int execute() const
  {
    const auto spec = scenario.load();
    auto in = open_input(input);
    const auto trace = slmc::read_trace_csv(in);

    std::size_t n = 2;
    if (states)
    {
      n = *states;
    }
    else if (spec)
    {
      n = spec->num_states;
    }
    else if (!trace.empty())
    {
      n = std::max<std::size_t>(2, *std::max_element(trace.begin(), trace.end()));
    }
    const auto cfg = ident.resolve(ident.load(), n);

    auto report = identify_states(trace, cfg);
    std::vector<std::size_t> jumps;
    if (spec)
    {
      slmc::attach_truth(report, *spec);
      jumps = spec->jump_points();
    }
    emit(out_path, [&](std::ostream& os) { slmc::write_report_csv(os, report); });
    if (!out_path.empty())
    {
      print_run_summary(std::cout, report, jumps);
    }
    return exit_ok;
  }

  int code = exit_ok;
};

struct DelaysCmd
{
  std::string input;
  bool synthetic = false;
  std::uint64_t seed = 1;
  IdentifierFlags ident;
  std::optional<std::size_t> smooth;
  std::string states_out;
  std::string out_path;

  void add_to(CLI::App& app)
  {
    auto* cmd = app.add_subcommand("delays", "Classify packet delays into 3 channel states and identify the chain");
    auto* in = cmd->add_option("delays", input, "Delay CSV (packet_index,delay_ms or packet_index,t_send_us,t_recv_us)");
    auto* syn = cmd->add_flag("--synthetic", synthetic, "Use the built-in synthetic delay trace instead of a file");
    in->excludes(syn);
    cmd->add_option("--seed", seed, "Seed for --synthetic");
    ident.add_to(*cmd);
    cmd->add_option("--smooth-half-width", smooth, "Half width in windows of the smoothed classical ground truth");
    cmd->add_option("--states-out", states_out, "Per-packet state CSV (packet_index,delay_ms,state)");
    cmd->add_option("--out", out_path, "Report CSV (default: stdout)");
    cmd->callback([this] { code = execute(); });
  }

  int execute() const
  {
    if (input.empty() && !synthetic)
    {
      throw CLI::RequiredError{"delays file or --synthetic"};
    }
    const auto file = ident.load();
    slmc::DelayConfig delay_cfg;
    file.delays.apply_to(delay_cfg);
    const auto cfg = ident.resolve(file, 3);

    std::vector<slmc::DelayRecord> records;
    std::vector<slmc::StateId> labels;
    slmc::SyntheticDelaySpec synth;
    if (synthetic)
    {
      synth.seed = seed;
      auto trace = slmc::synthesize_delays(synth);
      records = std::move(trace.records);
      labels = std::move(trace.labels);
    }
    else
    {
      auto in = open_input(input);
      records = slmc::read_delay_csv(in);
    }

    const auto states = slmc::pipeline(records, delay_cfg);
    if (!states_out.empty())
    {
      emit(states_out, [&](std::ostream& os) { slmc::write_state_csv(os, records, states); });
    }

    auto report = identify_states(states, cfg);
    if (synthetic)
    {
      slmc::attach_truth(report, synth.truth());
    }
    else if (!report.rows.empty())
    {
      slmc::attach_smoothed_truth(report, smooth.value_or(file.smooth_half_width.value_or(25)));
    }
    emit(out_path, [&](std::ostream& os) { slmc::write_report_csv(os, report); });

    if (!out_path.empty())
    {
      std::size_t counts[3] = {0, 0, 0};
      for (auto s : states)
      {
        ++counts[s - 1];
      }
      std::cout << "packets=" << states.size() << " state1=" << counts[0] << " state2=" << counts[1]
                << " state3=" << counts[2] << '\n';
      if (synthetic)
      {
        std::size_t correct = 0;
        for (std::size_t k = 0; k < states.size(); ++k)
        {
          correct += states[k] == labels[k] ? 1 : 0;
        }
        std::cout << "classification_accuracy=" << static_cast<double>(correct) / static_cast<double>(states.size())
                  << '\n';
      }
      print_run_summary(std::cout, report, {});
    }
    return exit_ok;
  }

  int code = exit_ok;
};

struct CompareCmd
{
  std::string input;
  ScenarioFlags scenario;
  std::vector<std::size_t> jumps;
  std::string out_path;

  void add_to(CLI::App& app)
  {
    auto* cmd = app.add_subcommand("compare", "RMSE of SL and classical estimates against ground truth");
    cmd->add_option("report", input, "Report CSV with gt_p_i_j columns")->required();
    scenario.add_to(*cmd, "whose jumps are evaluated");
    cmd->add_option("--jump", jumps, "Packet index of an injected jump (repeatable)");
    cmd->add_option("--out", out_path, "Summary output (default: stdout)");
    cmd->callback([this] { code = execute(); });
  }

  int execute() const
  {
    auto in = open_input(input);
    const auto report = slmc::read_report_csv(in);
    std::vector<std::size_t> all_jumps = jumps;
    if (const auto spec = scenario.load())
    {
      const auto j = spec->jump_points();
      all_jumps.insert(all_jumps.end(), j.begin(), j.end());
    }
    const auto summary = slmc::summarize(report, all_jumps);
    emit(out_path, [&](std::ostream& os) { slmc::write_summary(os, summary); });
    return exit_ok;
  }

  int code = exit_ok;
};

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Subjective-logic identification of time-varying Markov channel models"};
  app.require_subcommand(1);

  SimulateCmd simulate;
  IdentifyCmd identify;
  DelaysCmd delays;
  CompareCmd compare;
  simulate.add_to(app);
  identify.add_to(app);
  delays.add_to(app);
  compare.add_to(app);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp& e)
  {
    return app.exit(e);
  }
  catch (const CLI::CallForAllHelp& e)
  {
    return app.exit(e);
  }
  catch (const CLI::Error& e)
  {
    app.exit(e);
    return exit_usage;
  }
  catch (const slmc::ConfigError& e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  }
  catch (const slmc::IoError& e)
  {
    std::cerr << "i/o error: " << e.what() << '\n';
    return exit_io;
  }
  catch (const slmc::Error& e)
  {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_data;
  }

  for (int code : {simulate.code, identify.code, delays.code, compare.code})
  {
    if (code != exit_ok)
    {
      return code;
    }
  }
  return exit_ok;
}
