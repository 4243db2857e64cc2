module.exports = require('bindings')('addon.node');
