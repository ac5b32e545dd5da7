#ifndef METACSV_SERVICE_HPP
#define METACSV_SERVICE_HPP

#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace metacsv {

struct ServiceConfig {
    std::string bind_address = "127.0.0.1";
    int port = 8080;
    /// Default wiki for title= sources; requests may override with base=.
    std::string wiki_base_url;
};

ServiceConfig service_config_from_env();

/// Mount /analyze, /csv and /health on the given server. The config is
/// copied; handlers share no mutable state, so concurrent requests are
/// safe.
void register_routes(httplib::Server& server, const ServiceConfig& config);

/// Build and run the service (blocking). Returns false if the port could
/// not be bound.
bool run_service(const ServiceConfig& config);

}  // namespace metacsv

#endif
