#ifndef WMAPF__WMAPF_HPP
#define WMAPF__WMAPF_HPP

#include <wmapf/assignment.hpp>
#include <wmapf/collision.hpp>
#include <wmapf/geometry.hpp>
#include <wmapf/ipp.hpp>
#include <wmapf/kinematics.hpp>
#include <wmapf/metrics.hpp>
#include <wmapf/routing_graph.hpp>
#include <wmapf/simulator.hpp>
#include <wmapf/svg.hpp>
#include <wmapf/time.hpp>
#include <wmapf/trajectory.hpp>
#include <wmapf/vpstar.hpp>
#include <wmapf/warehouse.hpp>

#endif // WMAPF__WMAPF_HPP
