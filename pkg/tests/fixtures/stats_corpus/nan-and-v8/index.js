const addon = require('bindings')('addon.node');

module.exports = (x) => addon.f(x);
