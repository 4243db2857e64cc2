let addon=require('bindings')('addon.node');
module.exports = (str) => {
    if (!str)
        throw 'Invalid string';
    return addon.Pad(str);
}
