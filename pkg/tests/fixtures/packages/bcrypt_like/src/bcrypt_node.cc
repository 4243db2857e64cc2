#include <node.h>
#include <node_buffer.h>
#include <string.h>

using namespace v8;
using namespace node;

Handle<Value> GenerateSalt(const Arguments& args) {
    HandleScope scope;

    if (args.Length() < 2) {
        return ThrowException(Exception::TypeError(String::New("2 arguments expected")));
    }

    if (!Buffer::HasInstance(args[1]) || Buffer::Length(args[1]) != 16) {
        return ThrowException(Exception::TypeError(String::New("Second argument must be a 16 byte Buffer")));
    }

    const int32_t rounds = args[0]->Int32Value();
    u_int8_t* seed = (u_int8_t*)Buffer::Data(args[1]);

    char salt[_SALT_LEN];
    bcrypt_gensalt(rounds, seed, salt);

    return scope.Close(String::New(salt, strlen(salt)));
}

void init(Handle<Object> target) {
    NODE_SET_METHOD(target, "gen_salt_sync", GenerateSalt);
}

NODE_MODULE(bcrypt_lib, init);
